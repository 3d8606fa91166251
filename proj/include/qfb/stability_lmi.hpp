#pragma once

// Delay-dependent stability certificate for the two-qubit Bell example under
// the delayed Lyapunov law u2 = -2k mu3(t - tau):
//
//   [ M + S S~   S    tau S ]
//   [ S^T       -eps  0     ]  < 0,   M = [[q + tau eps, -2k, 0],
//   [ tau S^T    0   -tau r ]              [-2k, -q, 0], [0, 0, tau r]],
//                                     S~ = [2, -2, 0]
//
// together with the reduced mu3 dynamics the certificate is built on.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qfb/errors.hpp"
#include "qfb/jacobi.hpp"
#include "qfb/linalg.hpp"

namespace qfb {

struct LmiProblem {
  double tau = 0.0;
  double k = 1.0;
};

struct LmiCandidate {
  double q = 1.0;
  double r = 1.0;
  double eps = 1.0;
  std::array<double, 3> s{0.0, 0.0, 0.0};
};

/// Symmetric 5x5 block matrix. S S~ is not symmetric in general; its
/// symmetric part carries the same quadratic form and is what is stored.
inline RMatrix assemble_lmi(const LmiProblem& prob, const LmiCandidate& c) {
  const double tau = prob.tau;
  const double k = prob.k;
  RMatrix m = RMatrix::Zero(5, 5);
  m(0, 0) = c.q + tau * c.eps;
  m(0, 1) = m(1, 0) = -2.0 * k;
  m(1, 1) = -c.q;
  m(2, 2) = tau * c.r;

  const std::array<double, 3> s_tilde{2.0, -2.0, 0.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) += 0.5 * (c.s[i] * s_tilde[j] + c.s[j] * s_tilde[i]);

  for (int i = 0; i < 3; ++i) {
    m(i, 3) = m(3, i) = c.s[i];
    m(i, 4) = m(4, i) = tau * c.s[i];
  }
  m(3, 3) = -c.eps;
  m(4, 4) = -tau * c.r;
  return m;
}

/// Matrix whose negative definiteness is tested. For tau > 0 this is the
/// full 5x5 block. For tau = 0 both the integral-term row (-tau r) and the
/// f(0) row (weight tau r, no S~ coupling) vanish identically, so the
/// problem is reduced to the (mu(0), mu(-tau), eps) coordinates.
inline RMatrix feasibility_matrix(const LmiProblem& prob, const LmiCandidate& c) {
  RMatrix full = assemble_lmi(prob, c);
  if (prob.tau > 0.0) return full;
  const std::array<Eigen::Index, 3> keep{0, 1, 3};
  RMatrix reduced(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) reduced(i, j) = full(keep[i], keep[j]);
  return reduced;
}

struct DefinitenessReport {
  bool negative_definite = false;
  double max_eigenvalue = 0.0;
};

/// True iff the largest eigenvalue is below -margin.
inline DefinitenessReport is_negative_definite(const RMatrix& m, double margin = 0.0) {
  if (m.rows() != m.cols()) throw ContractError("is_negative_definite: matrix must be square");
  if (!(margin >= 0.0)) throw ContractError("is_negative_definite: margin must be >= 0");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kTolAlgebra)
    throw ContractError("is_negative_definite: matrix is not symmetric");
  const double top = jacobi_eigen(m).values.maxCoeff();
  return {top < -margin, top};
}

struct SearchBox {
  double positive_lo = 1e-3;  ///< log-uniform range for q, r, eps
  double positive_hi = 1e3;
  double s_lo = -10.0;
  double s_hi = 10.0;

  bool empty() const { return !(positive_lo > 0.0 && positive_hi > positive_lo && s_hi > s_lo); }
};

struct SearchOptions {
  std::size_t budget = 10000;  ///< random starts
  int refine_iterations = 200;
  double margin = 1e-6;
  std::uint64_t seed = 0x5eed1a1ULL;
  SearchBox box;
};

struct LmiSearchResult {
  bool feasible = false;
  LmiCandidate candidate;  ///< feasible candidate, or best witness found
  double max_eigenvalue = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  LmiProblem problem;
};

namespace detail {

// Search coordinates: (log q, log r, log eps, s1, s2, s3), clamped to the box.
using LmiPoint = std::array<double, 6>;

inline LmiCandidate to_candidate(const LmiPoint& x, const SearchBox& box) {
  const double llo = std::log(box.positive_lo);
  const double lhi = std::log(box.positive_hi);
  LmiCandidate c;
  c.q = std::exp(std::clamp(x[0], llo, lhi));
  c.r = std::exp(std::clamp(x[1], llo, lhi));
  c.eps = std::exp(std::clamp(x[2], llo, lhi));
  for (int i = 0; i < 3; ++i) c.s[i] = std::clamp(x[3 + i], box.s_lo, box.s_hi);
  return c;
}

inline LmiPoint to_point(const LmiCandidate& c) {
  return {std::log(c.q), std::log(c.r), std::log(c.eps), c.s[0], c.s[1], c.s[2]};
}

}  // namespace detail

/// Multi-start random search over the box followed by Nelder-Mead refinement
/// of the best start, minimizing the largest eigenvalue. Returns the first
/// candidate below -margin, otherwise the best witness. Deterministic in seed.
/// An infeasible result means "not found within budget", not a proof.
inline LmiSearchResult search_feasible(const LmiProblem& prob, const SearchOptions& opt = {}) {
  if (opt.box.empty()) throw ContractError("search_feasible: empty search ranges");
  if (opt.budget < 1) throw ContractError("search_feasible: budget must be >= 1");
  if (!(prob.k > 0.0) || !(prob.tau >= 0.0) || !std::isfinite(prob.tau) || !std::isfinite(prob.k))
    throw ContractError("search_feasible: need tau >= 0 and k > 0");

  LmiSearchResult result;
  result.problem = prob;
  auto evaluate = [&](const LmiCandidate& c) {
    ++result.evaluations;
    return jacobi_eigen(feasibility_matrix(prob, c)).values.maxCoeff();
  };

  std::mt19937_64 gen(opt.seed);
  std::uniform_real_distribution<double> log_pos(std::log(opt.box.positive_lo),
                                                 std::log(opt.box.positive_hi));
  std::uniform_real_distribution<double> s_dist(opt.box.s_lo, opt.box.s_hi);

  for (std::size_t i = 0; i < opt.budget; ++i) {
    const detail::LmiPoint x{log_pos(gen), log_pos(gen), log_pos(gen), s_dist(gen), s_dist(gen), s_dist(gen)};
    const LmiCandidate c = detail::to_candidate(x, opt.box);
    const double top = evaluate(c);
    if (top < result.max_eigenvalue) {
      result.max_eigenvalue = top;
      result.candidate = c;
    }
    if (top < -opt.margin) {
      result.feasible = true;
      return result;
    }
  }

  // Nelder-Mead on the best start.
  constexpr int dim = 6;
  std::array<detail::LmiPoint, dim + 1> simplex;
  std::array<double, dim + 1> value;
  simplex[0] = detail::to_point(result.candidate);
  value[0] = result.max_eigenvalue;
  for (int i = 0; i < dim; ++i) {
    simplex[i + 1] = simplex[0];
    simplex[i + 1][i] += i < 3 ? 0.5 : 1.0;
    value[i + 1] = evaluate(detail::to_candidate(simplex[i + 1], opt.box));
  }
  auto record = [&](const detail::LmiPoint& x, double v) {
    if (v < result.max_eigenvalue) {
      result.max_eigenvalue = v;
      result.candidate = detail::to_candidate(x, opt.box);
    }
    return v < -opt.margin;
  };
  for (int i = 0; i <= dim; ++i)
    if (record(simplex[i], value[i])) {
      result.feasible = true;
      return result;
    }

  for (int iter = 0; iter < opt.refine_iterations; ++iter) {
    std::array<int, dim + 1> idx;
    for (int i = 0; i <= dim; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return value[a] < value[b]; });
    const int worst = idx[dim];
    detail::LmiPoint centroid{};
    for (int i = 0; i < dim; ++i)
      for (int d = 0; d < dim; ++d) centroid[d] += simplex[idx[i]][d] / dim;

    auto along = [&](double coef) {
      detail::LmiPoint p;
      for (int d = 0; d < dim; ++d) p[d] = centroid[d] + coef * (simplex[worst][d] - centroid[d]);
      return p;
    };
    const detail::LmiPoint reflected = along(-1.0);
    const double fr = evaluate(detail::to_candidate(reflected, opt.box));
    if (fr < value[idx[0]]) {
      const detail::LmiPoint expanded = along(-2.0);
      const double fe = evaluate(detail::to_candidate(expanded, opt.box));
      if (fe < fr) {
        simplex[worst] = expanded;
        value[worst] = fe;
      } else {
        simplex[worst] = reflected;
        value[worst] = fr;
      }
    } else if (fr < value[idx[dim - 1]]) {
      simplex[worst] = reflected;
      value[worst] = fr;
    } else {
      const detail::LmiPoint contracted = along(0.5);
      const double fc = evaluate(detail::to_candidate(contracted, opt.box));
      if (fc < value[worst]) {
        simplex[worst] = contracted;
        value[worst] = fc;
      } else {
        const int best = idx[0];
        for (int i = 0; i <= dim; ++i) {
          if (i == best) continue;
          for (int d = 0; d < dim; ++d)
            simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
          value[i] = evaluate(detail::to_candidate(simplex[i], opt.box));
        }
      }
    }
    for (int i = 0; i <= dim; ++i)
      if (record(simplex[i], value[i])) {
        result.feasible = true;
        return result;
      }
  }
  return result;
}

enum class DelayBracketStatus { bracketed, infeasible_at_zero, feasible_at_cap };

struct DelayBracket {
  DelayBracketStatus status = DelayBracketStatus::bracketed;
  double feasible_tau = 0.0;    ///< largest delay certified feasible
  double infeasible_tau = 0.0;  ///< smallest delay where search failed
  int searches = 0;
};

/// Bisection on tau over search_feasible. Assumes feasibility is monotone in
/// tau, which is a heuristic, not a theorem.
inline DelayBracket max_stable_delay(double k, double precision, const SearchOptions& opt = {},
                                     double tau_cap = 64.0) {
  if (!(k > 0.0)) throw ContractError("max_stable_delay: k must be positive");
  if (!(precision > 0.0)) throw ContractError("max_stable_delay: precision must be positive");
  DelayBracket b;
  auto feasible = [&](double tau) {
    ++b.searches;
    return search_feasible({tau, k}, opt).feasible;
  };
  if (!feasible(0.0)) {
    b.status = DelayBracketStatus::infeasible_at_zero;
    return b;
  }
  double lo = 0.0;
  double hi = std::min(1.0, tau_cap);
  while (feasible(hi)) {
    lo = hi;
    if (hi >= tau_cap) {
      b.status = DelayBracketStatus::feasible_at_cap;
      b.feasible_tau = b.infeasible_tau = hi;
      return b;
    }
    hi = std::min(2.0 * hi, tau_cap);
  }
  while (hi - lo > precision) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  b.feasible_tau = lo;
  b.infeasible_tau = hi;
  return b;
}

/// key=value lines describing a search result, for metadata files.
inline std::vector<std::string> lmi_report_lines(const LmiSearchResult& r) {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  return {
      "lmi_tau=" + num(r.problem.tau),
      "lmi_k=" + num(r.problem.k),
      std::string("lmi_feasible=") + (r.feasible ? "true" : "false"),
      "lmi_max_eigenvalue=" + num(r.max_eigenvalue),
      "lmi_q=" + num(r.candidate.q),
      "lmi_r=" + num(r.candidate.r),
      "lmi_eps=" + num(r.candidate.eps),
      "lmi_s=" + num(r.candidate.s[0]) + ";" + num(r.candidate.s[1]) + ";" + num(r.candidate.s[2]),
      "lmi_evaluations=" + std::to_string(r.evaluations),
  };
}

// ---------------------------------------------------------------------------
// Two-qubit parameterization and the reduced mu3 model.

/// rho = [[nu1, l1 - i m1, l2 - i m2, l3 - i m3],
///        [.,   nu2,       l4 - i m4, l5 - i m5],
///        [.,   .,         nu3,       l6 - i m6],
///        [.,   .,         .,   1 - nu1 - nu2 - nu3]]  (Hermitian)
struct TwoQubitParameters {
  std::array<double, 3> nu{};
  std::array<double, 6> lambda{};
  std::array<double, 6> mu{};
};

namespace detail {
// Upper-triangle positions of lambda_j - i mu_j, j = 1..6.
inline constexpr std::array<std::array<int, 2>, 6> kCoherencePositions{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
}  // namespace detail

inline TwoQubitParameters extract_parameters(const CMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw ContractError("two-qubit state must be 4x4");
  TwoQubitParameters p;
  for (int i = 0; i < 3; ++i) p.nu[i] = rho(i, i).real();
  for (int j = 0; j < 6; ++j) {
    const auto [r, c] = detail::kCoherencePositions[j];
    p.lambda[j] = rho(r, c).real();
    p.mu[j] = -rho(r, c).imag();
  }
  return p;
}

inline CMatrix embed_parameters(const TwoQubitParameters& p) {
  CMatrix rho = CMatrix::Zero(4, 4);
  for (int i = 0; i < 3; ++i) rho(i, i) = p.nu[i];
  rho(3, 3) = 1.0 - p.nu[0] - p.nu[1] - p.nu[2];
  for (int j = 0; j < 6; ++j) {
    const auto [r, c] = detail::kCoherencePositions[j];
    rho(r, c) = Complex(p.lambda[j], -p.mu[j]);
    rho(c, r) = Complex(p.lambda[j], p.mu[j]);
  }
  return rho;
}

/// Coordinates entering the mu3 dynamics.
struct ReducedState {
  double mu3 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double lambda5 = 0.0;
  double lambda6 = 0.0;
  double nu2 = 0.0;
  double nu3 = 0.0;
};

inline ReducedState extract_reduced(const CMatrix& rho) {
  const TwoQubitParameters p = extract_parameters(rho);
  ReducedState s;
  s.mu3 = p.mu[2];
  s.lambda1 = p.lambda[0];
  s.lambda2 = p.lambda[1];
  s.lambda3 = p.lambda[2];
  s.lambda5 = p.lambda[4];
  s.lambda6 = p.lambda[5];
  s.nu2 = p.nu[1];
  s.nu3 = p.nu[2];
  return s;
}

/// Drift of mu3 under control u2 (unit measurement strength and efficiency).
inline double mu3_drift(const ReducedState& s, double u2) {
  return s.lambda1 - s.lambda2 + s.lambda5 - s.lambda6 + 2.0 * s.lambda3 * u2;
}

inline double mu3_diffusion(const ReducedState& s) { return 4.0 * s.mu3 * (s.nu2 + s.nu3); }

inline double mu3_reduced_step(const ReducedState& s, double u2, double dt, double dW) {
  return s.mu3 + mu3_drift(s, u2) * dt + mu3_diffusion(s) * dW;
}

}  // namespace qfb
