#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qfb/errors.hpp"
#include "qfb/linalg.hpp"
#include "qfb/quantum_core.hpp"

namespace qfb {

/// Partition of the state space by V = 1 - Tr^2(rho rho_d):
/// low  = V < 1 - gamma,
/// mid  = 1 - gamma <= V < 1 - gamma/2,
/// high = V >= 1 - gamma/2.
enum class Region { low, mid, high };

/// Last non-mid region seen by the controller.
enum class Latch { unset, from_high, from_low, initial_mid };

enum class Strategy { bang_bang, switching_lyapunov };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::low: return "low";
    case Region::mid: return "mid";
    case Region::high: return "high";
  }
  return "?";
}

inline const char* to_string(Latch l) {
  switch (l) {
    case Latch::unset: return "unset";
    case Latch::from_high: return "from_high";
    case Latch::from_low: return "from_low";
    case Latch::initial_mid: return "initial_mid";
  }
  return "?";
}

inline const char* to_string(Strategy s) {
  return s == Strategy::bang_bang ? "bang_bang" : "switching_lyapunov";
}

inline Region classify_region(double v, double gamma) {
  constexpr double slack = 1e-9;
  if (!(v >= -slack && v <= 1.0 + slack))
    throw InvalidDistance("distance " + std::to_string(v) + " outside [0, 1]");
  if (v < 1.0 - gamma) return Region::low;
  if (v < 1.0 - gamma / 2.0) return Region::mid;
  return Region::high;
}

struct ControllerState {
  double gamma = 0.06;
  double k = 1.0;
  Strategy strategy = Strategy::bang_bang;
  Region region = Region::high;
  Latch latch = Latch::unset;

  /// gamma must lie in (0, 1/n^2); gamma = 0 collapses the mid band.
  static ControllerState make(Strategy strategy, double gamma, double k, Eigen::Index n) {
    const double upper = 1.0 / static_cast<double>(n * n);
    if (!(gamma > 0.0 && gamma < upper))
      throw ConfigError("gamma must lie in (0, " + std::to_string(upper) + ")");
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("feedback gain k must be positive");
    ControllerState c;
    c.gamma = gamma;
    c.k = k;
    c.strategy = strategy;
    return c;
  }
};

struct PolicyDecision {
  double u2 = 0.0;
  ControllerState next;
};

namespace detail {
// Shared three-branch switching: returns true when the constant branch
// (u2 = 1) applies, and updates region and latch.
inline bool constant_branch(ControllerState& c, Region region) {
  c.region = region;
  switch (region) {
    case Region::high:
      c.latch = Latch::from_high;
      return true;
    case Region::low:
      c.latch = Latch::from_low;
      return false;
    case Region::mid:
      if (c.latch == Latch::unset) c.latch = Latch::initial_mid;
      return c.latch != Latch::from_low;
  }
  return true;
}
}  // namespace detail

/// u2 in {0, 1}.
inline PolicyDecision bangbang_policy(const ControllerState& ctrl, Region region_delayed) {
  PolicyDecision d{0.0, ctrl};
  d.u2 = detail::constant_branch(d.next, region_delayed) ? 1.0 : 0.0;
  return d;
}

/// Constant 1 in the high branch, -k Tr(i[H2, rho_delayed] rho_d) in the low branch.
inline PolicyDecision lyapunov_policy(const ControllerState& ctrl, const CMatrix& rho_delayed,
                                      Region region_delayed, const SystemSpec& spec) {
  PolicyDecision d{0.0, ctrl};
  if (detail::constant_branch(d.next, region_delayed))
    d.u2 = 1.0;
  else
    d.u2 = -ctrl.k * control_signal_raw(rho_delayed, spec.h2, spec.target);
  return d;
}

/// Classifies the delayed state and dispatches on the controller's strategy.
inline PolicyDecision apply_policy(const ControllerState& ctrl, const CMatrix& rho_delayed,
                                   const SystemSpec& spec) {
  const Region region = classify_region(distance_v(rho_delayed, spec.target), ctrl.gamma);
  if (ctrl.strategy == Strategy::bang_bang) return bangbang_policy(ctrl, region);
  return lyapunov_policy(ctrl, rho_delayed, region, spec);
}

/// Ring of filter-state snapshots supplying rho_{t - tau} at fixed dt.
/// Snapshot k is the state at step k. Before tau has elapsed the first
/// snapshot is returned (hold-initial history).
class DelayBuffer {
 public:
  DelayBuffer(double tau, double dt) : tau_(tau), dt_(dt) {
    if (!(dt > 0.0)) throw ContractError("dt must be positive");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ContractError("tau must be >= 0");
    lag_ = static_cast<std::size_t>(std::llround(tau / dt));
    slots_.resize(lag_ + 1);
  }

  void push(const CMatrix& rho) {
    if (count_ == 0) initial_ = rho;
    slots_[count_ % slots_.size()] = rho;
    ++count_;
  }

  /// State used by the controller at step `step`.
  const CMatrix& delayed_at_step(std::size_t step) const {
    if (count_ == 0) throw NotInitialized("delay buffer has no snapshots");
    if (step >= count_) throw ContractError("step " + std::to_string(step) + " not yet recorded");
    if (step < lag_) return initial_;
    const std::size_t source = step - lag_;
    if (source + slots_.size() < count_)
      throw ContractError("snapshot for step " + std::to_string(source) + " was evicted");
    return slots_[source % slots_.size()];
  }

  const CMatrix& delayed_state(double t) const {
    return delayed_at_step(static_cast<std::size_t>(std::llround(t / dt_)));
  }

  std::size_t lag_steps() const noexcept { return lag_; }
  /// History slots; at least one even when tau = 0.
  std::size_t capacity() const noexcept { return lag_ == 0 ? 1 : lag_; }
  std::size_t recorded() const noexcept { return count_; }
  double tau() const noexcept { return tau_; }
  double dt() const noexcept { return dt_; }
  /// |d dt - tau| from rounding the delay to whole steps.
  double quantization_error() const noexcept {
    return std::abs(static_cast<double>(lag_) * dt_ - tau_);
  }

 private:
  double tau_;
  double dt_;
  std::size_t lag_ = 0;
  std::size_t count_ = 0;
  CMatrix initial_;
  std::vector<CMatrix> slots_;
};

}  // namespace qfb
