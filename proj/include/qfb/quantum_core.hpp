#pragma once

// States, operators and superoperators for N-qubit measurement feedback,
// plus numerical validation of the structural conditions the control
// Hamiltonians must satisfy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qfb/errors.hpp"
#include "qfb/linalg.hpp"

namespace qfb {

/// Deviations of a matrix from being a physical state.
struct StateDefects {
  double hermiticity = 0.0;  ///< max |m_ij - conj(m_ji)|
  double trace = 0.0;        ///< |Tr m - 1|
  double min_eigenvalue = 0.0;

  bool physical() const {
    return hermiticity <= kTolHermitianState && trace <= kTolTrace &&
           min_eigenvalue >= -kTolPsd;
  }
};

inline StateDefects inspect_state(const CMatrix& m) {
  StateDefects d;
  d.hermiticity = hermiticity_error(m);
  d.trace = std::abs(m.trace() - Complex(1.0, 0.0));
  d.min_eigenvalue = min_eigenvalue(m);
  return d;
}

/// Hermitian, unit-trace, positive-semidefinite n x n matrix.
class DensityMatrix {
 public:
  /// Validates all state invariants; throws InvalidState otherwise.
  static DensityMatrix from_matrix(CMatrix m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      throw InvalidDimension("density matrix must be square and non-empty");
    const StateDefects d = inspect_state(m);
    if (!d.physical())
      throw InvalidState("not a physical state: hermiticity " + std::to_string(d.hermiticity) +
                         ", trace error " + std::to_string(d.trace) + ", min eigenvalue " +
                         std::to_string(d.min_eigenvalue));
    return DensityMatrix(std::move(m));
  }

  /// For matrices that are physical by construction (e.g. eigen-clipped).
  static DensityMatrix trusted(CMatrix m) { return DensityMatrix(std::move(m)); }

  static DensityMatrix maximally_mixed(Eigen::Index n) {
    return DensityMatrix(CMatrix::Identity(n, n) / static_cast<double>(n));
  }

  static DensityMatrix diagonal(const std::vector<double>& populations) {
    return from_matrix(qfb::diag(populations));
  }

  const CMatrix& matrix() const noexcept { return m_; }
  operator const CMatrix&() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InvalidDimension("operator must be square");
    if (m_.size() > 0 && hermiticity_error(m_) > kTolAlgebra)
      throw ContractError("operator is not Hermitian");
  }

  const CMatrix& matrix() const noexcept { return m_; }
  operator const CMatrix&() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  CMatrix m_;
};

/// GHZ-class target (|zeta> +/- |zeta^c>)/sqrt(2).
struct TargetSpec {
  std::string bits = "00";
  int sign = +1;
};

inline int qubit_count_for_dim(Eigen::Index n) {
  int q = 0;
  Eigen::Index d = 1;
  while (d < n) {
    d *= 2;
    ++q;
  }
  if (d != n) throw InvalidDimension("dimension " + std::to_string(n) + " is not a power of two");
  return q;
}

inline DensityMatrix ghz_state(const TargetSpec& target) {
  const std::size_t nq = target.bits.size();
  if (nq < 2) throw InvalidDimension("GHZ target needs at least two qubits");
  if (nq > 20) throw InvalidDimension("GHZ target register too large");
  if (target.sign != 1 && target.sign != -1) throw ContractError("GHZ sign must be +1 or -1");
  Eigen::Index idx = 0;
  Eigen::Index idx_c = 0;
  for (char b : target.bits) {
    if (b != '0' && b != '1') throw ContractError("GHZ bits must be '0' or '1'");
    idx = 2 * idx + (b == '1');
    idx_c = 2 * idx_c + (b == '0');
  }
  const Eigen::Index n = Eigen::Index{1} << nq;
  CMatrix rho = CMatrix::Zero(n, n);
  rho(idx, idx) = 0.5;
  rho(idx_c, idx_c) = 0.5;
  rho(idx, idx_c) = 0.5 * target.sign;
  rho(idx_c, idx) = 0.5 * target.sign;
  return DensityMatrix::trusted(std::move(rho));
}

struct Observable {
  HermitianOperator op;
  double lambda_d = 0.0;
};

/// Diagonal measured observable diag(lambda_d, lambda_2, ..., lambda_{n-1}, lambda_d)
/// with every interior eigenvalue distinct from lambda_d. Interior entries may
/// repeat among themselves.
inline Observable build_observable(const std::vector<double>& diag_entries) {
  const auto n = static_cast<Eigen::Index>(diag_entries.size());
  if (n < 4) throw InvalidDimension("observable needs at least two qubits (n >= 4)");
  qubit_count_for_dim(n);
  const double lambda_d = diag_entries.front();
  if (std::abs(diag_entries.back() - lambda_d) > kTolAlgebra)
    throw PatternError("first and last diagonal entries must both equal lambda_d");
  for (std::size_t i = 1; i + 1 < diag_entries.size(); ++i)
    if (std::abs(diag_entries[i] - lambda_d) <= kTolAlgebra)
      throw PatternError("interior entry " + std::to_string(i) + " equals lambda_d");
  return {HermitianOperator(qfb::diag(diag_entries)), lambda_d};
}

/// Observable sum_j a_j sigma_z^(j). The result is checked against the
/// diagonal pattern rather than trusted.
inline Observable observable_from_sigma_z(const std::vector<double>& coefficients) {
  const int nq = static_cast<int>(coefficients.size());
  if (nq < 2) throw InvalidDimension("need at least two qubits");
  CMatrix a = CMatrix::Zero(Eigen::Index{1} << nq, Eigen::Index{1} << nq);
  for (int q = 0; q < nq; ++q) a += coefficients[static_cast<std::size_t>(q)] * on_site(pauli::z(), q, nq);
  std::vector<double> d(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) d[static_cast<std::size_t>(i)] = a(i, i).real();
  return build_observable(d);
}

/// Lindblad dissipator A rho A^dag - (A^dag A rho + rho A^dag A)/2.
inline CMatrix dissipator(const CMatrix& a, const CMatrix& rho) {
  require_same_shape(a, rho, "dissipator");
  const CMatrix ada = a.adjoint() * a;
  return a * rho * a.adjoint() - 0.5 * (ada * rho + rho * ada);
}

/// Measurement back-action A rho + rho A^dag - Tr[(A + A^dag) rho] rho.
inline CMatrix backaction(const CMatrix& a, const CMatrix& rho) {
  require_same_shape(a, rho, "backaction");
  const CMatrix a_rho = a * rho;
  const CMatrix rho_adag = rho * a.adjoint();
  const Complex tr = a_rho.trace() + rho_adag.trace();
  return a_rho + rho_adag - tr * rho;
}

/// Tr(a b) without forming the product.
inline Complex trace_product(const CMatrix& a, const CMatrix& b) {
  return a.cwiseProduct(b.transpose()).sum();
}

/// V = 1 - Tr^2(rho rho_d).
inline double distance_v(const CMatrix& rho, const CMatrix& target) {
  require_same_shape(rho, target, "distance_v");
  const double overlap = trace_product(rho, target).real();
  return 1.0 - overlap * overlap;
}

/// V1 = Tr[(rho - I/n)^2] = Tr(rho^2) - 1/n.
inline double lyapunov_v1(const CMatrix& rho) {
  return trace_product(rho, rho).real() - 1.0 / static_cast<double>(rho.rows());
}

/// Tr(i[H2, rho] rho_d), the feedback bracket before gain.
inline double control_signal_raw(const CMatrix& rho, const CMatrix& h2, const CMatrix& target) {
  require_same_shape(rho, h2, "control_signal_raw");
  require_same_shape(rho, target, "control_signal_raw");
  const Complex value = kI * trace_product(commutator(h2, rho), target);
  return value.real();
}

/// Closed-loop model: H0 + H1 (u1 = 1) + u2 H2, diagonal observable A,
/// measurement rate Gamma_A, efficiency eta_A, GHZ target.
struct SystemSpec {
  int n_qubits = 2;
  HermitianOperator h0;
  HermitianOperator h1;
  HermitianOperator h2;
  HermitianOperator observable;
  double gamma_meas = 1.0;
  double eta_meas = 1.0;
  DensityMatrix target = DensityMatrix::maximally_mixed(4);
  double lambda_d = 1.0;
  TargetSpec target_spec;
  /// Operator multiplying beta(t) in the dephasing perturbation.
  CMatrix dephasing_op;

  // Cached combinations used by the integrator.
  CMatrix drift_base;  ///< H0 + H1
  CMatrix a_dag_a;

  Eigen::Index dim() const { return target.dim(); }
};

/// Builds a SystemSpec and checks its invariants: observable pattern,
/// A rho_d = lambda_d rho_d and [H0 + H1, rho_d] = 0.
inline SystemSpec make_system_spec(int n_qubits, CMatrix h0, CMatrix h1, CMatrix h2,
                                   const std::vector<double>& observable_diag, double gamma_meas,
                                   double eta_meas, TargetSpec target_spec) {
  if (n_qubits < 2) throw InvalidDimension("need at least two qubits");
  const Eigen::Index n = Eigen::Index{1} << n_qubits;
  if (static_cast<int>(target_spec.bits.size()) != n_qubits)
    throw InvalidDimension("target bit string length differs from qubit count");
  for (const CMatrix* m : {&h0, &h1, &h2})
    if (m->rows() != n || m->cols() != n) throw DimensionMismatch("Hamiltonian dimension mismatch");
  if (static_cast<Eigen::Index>(observable_diag.size()) != n)
    throw DimensionMismatch("observable dimension mismatch");
  if (!(gamma_meas > 0.0) || !std::isfinite(gamma_meas))
    throw ContractError("measurement strength must be positive");
  if (!(eta_meas > 0.0 && eta_meas <= 1.0))
    throw ContractError("measurement efficiency must lie in (0, 1]");

  SystemSpec s;
  s.n_qubits = n_qubits;
  s.h0 = HermitianOperator(std::move(h0));
  s.h1 = HermitianOperator(std::move(h1));
  s.h2 = HermitianOperator(std::move(h2));
  Observable obs = build_observable(observable_diag);
  s.observable = obs.op;
  s.lambda_d = obs.lambda_d;
  s.gamma_meas = gamma_meas;
  s.eta_meas = eta_meas;
  s.target_spec = std::move(target_spec);
  s.target = ghz_state(s.target_spec);
  s.dephasing_op = s.observable.matrix();
  s.drift_base = s.h0.matrix() + s.h1.matrix();
  s.a_dag_a = s.observable.matrix().adjoint() * s.observable.matrix();

  const CMatrix& rd = s.target.matrix();
  const double eig_err = (s.observable.matrix() * rd - s.lambda_d * rd).cwiseAbs().maxCoeff();
  if (eig_err > kTolStructure)
    throw ConditionViolation("target-eigenstate", "target is not a lambda_d eigenstate of A",
                             flatten(rd));
  if (commutator(s.drift_base, rd).cwiseAbs().maxCoeff() > kTolStructure)
    throw ConditionViolation("target-commutation", "[H0 + H1, rho_d] != 0", flatten(rd));
  return s;
}

/// Two-qubit Bell example: H0 = diag[1,-1,-1,1], H1 = I x sx - sx x I,
/// H2 = sz x I, A = sz x sz, target (|00> + |11>)/sqrt(2).
inline SystemSpec two_qubit_bell_system(double eta_meas = 1.0, double gamma_meas = 1.0) {
  const CMatrix id = pauli::identity();
  return make_system_spec(2, qfb::diag({1.0, -1.0, -1.0, 1.0}),
                          kron(id, pauli::x()) - kron(pauli::x(), id), kron(pauli::z(), id),
                          {1.0, -1.0, -1.0, 1.0}, gamma_meas, eta_meas, TargetSpec{"00", +1});
}

struct HamiltonianReport {
  double target_commutator = 0.0;          ///< ||[H0+H1, rho_d]||_F
  double min_family_commutator = 0.0;      ///< min over sampled eigenspace states != rho_d
  double min_commutant_commutator = 0.0;   ///< min over sampled commutant states != I/n
  int family_samples = 0;
  int commutant_samples = 0;
  int commutant_equilibria = 0;  ///< dimension of equilibria in the commutant (1 = I/n only)
};

namespace detail {
// Real basis of the Hermitian matrices commuting with diagonal `a`.
inline std::vector<CMatrix> commutant_basis(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  std::vector<CMatrix> basis;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      if (std::abs(a(i, i) - a(j, j)) > kTolAlgebra) continue;
      CMatrix e = CMatrix::Zero(n, n);
      if (i == j) {
        e(i, i) = 1.0;
        basis.push_back(e);
        continue;
      }
      e(i, j) = e(j, i) = 1.0;
      basis.push_back(e);
      e(i, j) = kI;
      e(j, i) = -kI;
      basis.push_back(e);
    }
  return basis;
}

// Traceless Hermitian X in span(basis) with [h, X] = 0, if one exists.
inline std::optional<CMatrix> traceless_null_direction(const CMatrix& h,
                                                       const std::vector<CMatrix>& basis,
                                                       int& null_dim) {
  const Eigen::Index n = h.rows();
  const auto m = static_cast<Eigen::Index>(basis.size());
  RMatrix lin(2 * n * n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const CMatrix c = commutator(h, basis[static_cast<std::size_t>(k)]);
    for (Eigen::Index e = 0; e < n * n; ++e) {
      lin(2 * e, k) = c.data()[e].real();
      lin(2 * e + 1, k) = c.data()[e].imag();
    }
  }
  Eigen::JacobiSVD<RMatrix> svd(lin, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, sv.size() ? sv(0) : 1.0);
  null_dim = 0;
  std::optional<CMatrix> found;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (k < sv.size() && sv(k) > cut) continue;
    ++null_dim;
    CMatrix x = CMatrix::Zero(n, n);
    for (Eigen::Index b = 0; b < m; ++b) x += svd.matrixV()(b, k) * basis[static_cast<std::size_t>(b)];
    x -= (x.trace() / static_cast<double>(n)) * CMatrix::Identity(n, n);
    if (!found && frobenius(x) > 1e-6) found = x;
  }
  return found;
}
}  // namespace detail

/// Checks, by sampling, that rho_d is the only equilibrium of
/// d rho = -i[H0 + H1, rho] dt on the lambda_d eigenspace family, and that
/// I/n is the only equilibrium of d rho = -i[H0 + H1 + H2, rho] dt on the
/// commutant of A. Throws ConditionViolation naming the failed check.
inline HamiltonianReport validate_hamiltonians(const SystemSpec& spec, int samples = 1000,
                                               std::uint64_t seed = 20240601,
                                               double tol = 1e-6) {
  if (samples < 1) throw ContractError("samples must be >= 1");
  const Eigen::Index n = spec.dim();
  const CMatrix& rd = spec.target.matrix();
  const CMatrix h01 = spec.h0.matrix() + spec.h1.matrix();
  const CMatrix h012 = h01 + spec.h2.matrix();
  HamiltonianReport report;

  report.target_commutator = frobenius(commutator(h01, rd));
  if (report.target_commutator > kTolStructure)
    throw ConditionViolation("target-commutation", "[H0 + H1, rho_d] != 0", flatten(rd));

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Eigenspace family: only rho_11, rho_nn, rho_1n, rho_n1 nonzero.
  report.min_family_commutator = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double p = unif(gen);
    const double radius = std::sqrt(p * (1.0 - p) * unif(gen));
    const double phase = 2.0 * std::numbers::pi * unif(gen);
    const Complex c = std::polar(radius, phase);
    CMatrix rho = CMatrix::Zero(n, n);
    rho(0, 0) = p;
    rho(n - 1, n - 1) = 1.0 - p;
    rho(0, n - 1) = c;
    rho(n - 1, 0) = std::conj(c);
    if (frobenius(rho - rd) <= tol) continue;
    const double norm = frobenius(commutator(h01, rho));
    report.min_family_commutator = std::min(report.min_family_commutator, norm);
    ++report.family_samples;
    if (norm <= tol)
      throw ConditionViolation("target-equilibrium-uniqueness",
                               "eigenspace state other than rho_d is an equilibrium of H0 + H1",
                               flatten(rho));
  }

  // Commutant of the diagonal observable: block structure by equal eigenvalues.
  const CMatrix& a = spec.observable.matrix();
  report.min_commutant_commutator = std::numeric_limits<double>::infinity();
  const CMatrix mixed = CMatrix::Identity(n, n) / static_cast<double>(n);
  for (int s = 0; s < samples; ++s) {
    CMatrix g = CMatrix::Zero(n, n);
    // Random subset of columns gives ranks 1..n spread over all blocks.
    const double keep = unif(gen);
    const auto forced = static_cast<Eigen::Index>(unif(gen) * static_cast<double>(n)) % n;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != forced && unif(gen) > keep) continue;
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(a(i, i) - a(j, j)) <= kTolAlgebra) g(i, j) = Complex(gauss(gen), gauss(gen));
    }
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    if (frobenius(rho - mixed) <= tol) continue;
    const double norm = frobenius(commutator(h012, rho));
    report.min_commutant_commutator = std::min(report.min_commutant_commutator, norm);
    ++report.commutant_samples;
    if (norm <= tol)
      throw ConditionViolation("intermediate-equilibrium-uniqueness",
                               "commutant state other than I/n is an equilibrium of H0 + H1 + H2",
                               flatten(rho));
  }

  // Equilibria form a linear subspace, usually of measure zero in the
  // sampled family; probe it directly. I/n + s X stays positive for a small
  // traceless null direction X.
  if (auto x = detail::traceless_null_direction(h012, detail::commutant_basis(a),
                                                report.commutant_equilibria)) {
    const double spectral = Eigen::SelfAdjointEigenSolver<CMatrix>(*x).eigenvalues().cwiseAbs().maxCoeff();
    const CMatrix rho = mixed + *x / (2.0 * static_cast<double>(n) * spectral);
    throw ConditionViolation("intermediate-equilibrium-uniqueness",
                             "commutant state other than I/n is an equilibrium of H0 + H1 + H2",
                             flatten(rho));
  }
  return report;
}

}  // namespace qfb
