#pragma once

// Fixed-step Euler-Maruyama integration of the closed-loop filter equation
//   d rho = (-i[H0 + H1 + u2 H2 + beta(t) D, rho] + Gamma D[A] rho) dt
//           + sqrt(eta Gamma) H[A] rho dW
//   dy    = dW + sqrt(eta Gamma) Tr[(A + A^dag) rho] dt
// with one innovation dW per step shared by state and record.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "qfb/errors.hpp"
#include "qfb/linalg.hpp"
#include "qfb/quantum_core.hpp"
#include "qfb/rng.hpp"

namespace qfb {

enum class Scheme { euler_maruyama };

struct IntegratorConfig {
  double dt = 1e-3;
  double horizon = 50.0;
  int sanitize_every = 1;
  Scheme scheme = Scheme::euler_maruyama;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

  /// `tau` is the feedback delay; the buffer must hold at least one slot.
  void validate(double tau = 0.0) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!(horizon >= dt)) throw ConfigError("horizon must be at least one step");
    if (sanitize_every < 1) throw ConfigError("sanitize_every must be >= 1");
    if (tau > 0.0 && dt > tau) throw ConfigError("dt must not exceed the delay tau");
  }
};

struct NoiseModel {
  double eta = 1.0;
  double gamma = 1.0;
  double dephasing_amp = 0.0;    ///< standard deviation of beta; 0 disables dephasing
  double dephasing_dwell = 0.1;  ///< beta is redrawn every dwell time units

  void validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma_meas must be positive");
    if (!(dephasing_amp >= 0.0) || !std::isfinite(dephasing_amp))
      throw ConfigError("dephasing amplitude must be >= 0");
    if (!(dephasing_dwell > 0.0)) throw ConfigError("dephasing dwell must be positive");
  }

  static NoiseModel from(const SystemSpec& spec, double amp = 0.0, double dwell = 0.1) {
    return {spec.eta_meas, spec.gamma_meas, amp, dwell};
  }
};

struct TrajectoryState {
  CMatrix rho;
  double t = 0.0;
  double y = 0.0;                ///< accumulated measurement record
  std::uint64_t rng_stream = 0;  ///< keys the Wiener and dephasing sub-streams
  std::size_t step = 0;
};

/// Piecewise-constant beta(t): an independent N(0, amp^2) draw per dwell
/// interval, keyed by (stream, interval index). Pure in its arguments.
inline double dephasing_sample(const NoiseModel& noise, double t, std::uint64_t stream) {
  if (noise.dephasing_amp == 0.0) return 0.0;
  const auto interval = static_cast<std::uint64_t>(std::floor(t / noise.dephasing_dwell + 1e-9));
  return noise.dephasing_amp *
         rng::counter_normal(rng::derive(stream, rng::kTagDephasing), interval);
}

/// dW for step `step` of stream `stream`, distributed N(0, dt).
inline double wiener_increment(std::uint64_t stream, std::size_t step, double dt) {
  return std::sqrt(dt) * rng::counter_normal(rng::derive(stream, rng::kTagWiener), step);
}

namespace detail {
inline double record_drift(const CMatrix& a, const CMatrix& rho, double eta, double gamma) {
  return std::sqrt(eta * gamma) * ((a + a.adjoint()) * rho).trace().real();
}
}  // namespace detail

/// dy = dW + sqrt(eta Gamma) Tr[(A + A^dag) rho] dt.
inline double measurement_increment(const CMatrix& rho, const SystemSpec& spec, double dW,
                                    double dt) {
  require_same_shape(spec.observable.matrix(), rho, "measurement_increment");
  return dW + detail::record_drift(spec.observable.matrix(), rho, spec.eta_meas, spec.gamma_meas) * dt;
}

/// One Euler-Maruyama step followed by Hermitization. Deterministic in
/// (state, u2, dW); beta(t) is looked up from the state's stream.
inline TrajectoryState em_step(const TrajectoryState& state, double u2, const SystemSpec& spec,
                               const NoiseModel& noise, const IntegratorConfig& cfg, double dW) {
  const CMatrix& rho = state.rho;
  const CMatrix& a = spec.observable.matrix();
  require_same_shape(a, rho, "em_step");
  const double dt = cfg.dt;

  CMatrix h = spec.drift_base + u2 * spec.h2.matrix();
  const double beta = dephasing_sample(noise, state.t, state.rng_stream);
  if (beta != 0.0) h += beta * spec.dephasing_op;

  const CMatrix a_rho = a * rho;
  const CMatrix rho_adag = rho * a.adjoint();
  const Complex record = a_rho.trace() + rho_adag.trace();
  const CMatrix dissip = a_rho * a.adjoint() - 0.5 * (spec.a_dag_a * rho + rho * spec.a_dag_a);
  const CMatrix back = a_rho + rho_adag - record * rho;

  TrajectoryState next;
  next.rho = rho + (-kI * commutator(h, rho) + noise.gamma * dissip) * dt +
             std::sqrt(noise.eta * noise.gamma) * back * dW;
  next.rho = hermitian_part(next.rho);
  next.t = state.t + dt;
  next.y = state.y + dW + std::sqrt(noise.eta * noise.gamma) * record.real() * dt;
  next.rng_stream = state.rng_stream;
  next.step = state.step + 1;
  if (!all_finite(next.rho) || !std::isfinite(next.y))
    throw NumericalBlowup(next.step, "non-finite state after step " + std::to_string(next.step));
  return next;
}

/// Projects onto the physical states: symmetrize, clip negative eigenvalues,
/// renormalize the trace.
inline DensityMatrix sanitize(const CMatrix& rho) {
  CMatrix h = hermitian_part(rho);
  // Positive definite input needs no clipping.
  Eigen::LLT<CMatrix> llt(h);
  if (llt.info() == Eigen::Success) {
    const double tr = h.trace().real();
    if (tr < 0.5) throw IntegrationDiverged("trace " + std::to_string(tr) + " below 0.5");
    if (tr != 1.0) h /= tr;
    return DensityMatrix::trusted(std::move(h));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  RVector w = es.eigenvalues().cwiseMax(0.0);
  const double tr = w.sum();
  if (!(tr >= 0.5)) throw IntegrationDiverged("clipped trace " + std::to_string(tr) + " below 0.5");
  w /= tr;
  const CMatrix& v = es.eigenvectors();
  CMatrix out = v * w.cast<Complex>().asDiagonal() * v.adjoint();
  return DensityMatrix::trusted(hermitian_part(out));
}

/// Euler step of the averaged (deterministic) dynamics under a constant u2.
inline CMatrix ensemble_drift_step(const CMatrix& rho_bar, double u2, const SystemSpec& spec,
                                   double dt) {
  require_same_shape(spec.observable.matrix(), rho_bar, "ensemble_drift_step");
  const CMatrix h = spec.drift_base + u2 * spec.h2.matrix();
  return rho_bar +
         (-kI * commutator(h, rho_bar) + spec.gamma_meas * dissipator(spec.observable, rho_bar)) * dt;
}

}  // namespace qfb
