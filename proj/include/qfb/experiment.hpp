#pragma once

// Seeded Monte Carlo ensembles of the delayed closed loop on the two-qubit
// Bell system, figure presets, flat key=value configuration and CSV export.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qfb/delay_control.hpp"
#include "qfb/errors.hpp"
#include "qfb/quantum_core.hpp"
#include "qfb/rng.hpp"
#include "qfb/sme_integrator.hpp"
#include "qfb/stability_lmi.hpp"

namespace qfb {

inline constexpr const char* kVersion = "qfb 0.1.0";

struct ExperimentConfig {
  std::string name = "custom";
  Strategy strategy = Strategy::bang_bang;
  double tau = 0.2;
  double gamma = 0.06;
  double k = 1.0;
  double dt = 1e-3;
  double horizon = 50.0;
  std::size_t n_traj = 30;
  double eta = 1.0;
  double gamma_meas = 1.0;
  double dephasing_amp = 0.0;
  double dephasing_dwell = 0.1;
  std::uint64_t seed = 1;
  /// rho1 | rho2 | target | mixed | diag:p1,...,pn | matrix:re,im,... (row-major)
  std::string initial_state = "rho1";
  std::string output_dir = "out";
  double checkpoint_every = 0.1;
  /// Run both strategies side by side.
  bool compare = false;
  unsigned threads = 0;  ///< 0 = hardware concurrency

  IntegratorConfig integrator() const { return {dt, horizon, 1, Scheme::euler_maruyama}; }
  NoiseModel noise() const { return {eta, gamma_meas, dephasing_amp, dephasing_dwell}; }

  void validate() const {
    if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be >= 0");
    integrator().validate(tau);
    noise().validate();
    ControllerState::make(strategy, gamma, k, 4);
    if (!(checkpoint_every >= dt)) throw ConfigError("checkpoint_every must be >= dt");
  }
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "bang_bang" || s == "bangbang" || s == "bb") return Strategy::bang_bang;
  if (s == "switching_lyapunov" || s == "lyapunov" || s == "ly") return Strategy::switching_lyapunov;
  throw ConfigError("unknown strategy '" + s + "'");
}

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.tau = 0.2;
  c.gamma = 0.06;
  c.k = 1.0;
  c.eta = 1.0;
  c.gamma_meas = 1.0;
  c.n_traj = 30;
  c.initial_state = "rho1";
  c.output_dir = "out/" + name;
  if (name == "fig1") {
    c.strategy = Strategy::bang_bang;
  } else if (name == "fig2") {
    c.strategy = Strategy::switching_lyapunov;
  } else if (name == "fig3a" || name == "fig3b") {
    c.strategy = name == "fig3a" ? Strategy::switching_lyapunov : Strategy::bang_bang;
    c.eta = 0.8;
    c.initial_state = "rho2";
  } else if (name == "fig4a" || name == "fig4b") {
    c.strategy = name == "fig4a" ? Strategy::switching_lyapunov : Strategy::bang_bang;
    c.initial_state = "rho2";
    c.dephasing_amp = 0.5;
    c.dephasing_dwell = 0.1;
  } else if (name == "fig5") {
    c.strategy = Strategy::switching_lyapunov;
    c.tau = 0.1;
    c.compare = true;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5"};
  return names;
}

namespace detail {
inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "'");
    }
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": '" + v + "'");
  }
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long d = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": '" + v + "'");
  }
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace detail

/// Applies one key=value setting.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_unsigned;
  if (key == "name") c.name = value;
  else if (key == "strategy") c.strategy = parse_strategy(value);
  else if (key == "tau") c.tau = parse_double(key, value);
  else if (key == "gamma") c.gamma = parse_double(key, value);
  else if (key == "k") c.k = parse_double(key, value);
  else if (key == "dt") c.dt = parse_double(key, value);
  else if (key == "horizon" || key == "T") c.horizon = parse_double(key, value);
  else if (key == "n_traj") c.n_traj = parse_unsigned(key, value);
  else if (key == "eta") c.eta = parse_double(key, value);
  else if (key == "gamma_meas") c.gamma_meas = parse_double(key, value);
  else if (key == "dephasing_amp") c.dephasing_amp = parse_double(key, value);
  else if (key == "dephasing_dwell") c.dephasing_dwell = parse_double(key, value);
  else if (key == "seed") c.seed = parse_unsigned(key, value);
  else if (key == "initial_state") c.initial_state = value;
  else if (key == "output_dir") c.output_dir = value;
  else if (key == "checkpoint_every") c.checkpoint_every = parse_double(key, value);
  else if (key == "compare") {
    if (value != "true" && value != "false") throw ConfigError("compare must be true or false");
    c.compare = value == "true";
  } else if (key == "threads") c.threads = static_cast<unsigned>(parse_unsigned(key, value));
  else throw ConfigError("unknown config key '" + key + "'");
}

/// Flat key=value text; '#' starts a comment. A `preset=NAME` line seeds the
/// defaults before the remaining keys are applied, wherever it appears.
inline ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::optional<std::string> base;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key == "preset") base = value;
    else entries.emplace_back(std::move(key), std::move(value));
  }
  ExperimentConfig c = base ? preset(*base) : ExperimentConfig{};
  for (const auto& [k, v] : entries) apply_setting(c, k, v);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Config echo in key=value form; parse_config reproduces the config.
inline std::vector<std::string> config_lines(const ExperimentConfig& c) {
  return {
      "name=" + c.name,
      std::string("strategy=") + to_string(c.strategy),
      "tau=" + format_number(c.tau),
      "gamma=" + format_number(c.gamma),
      "k=" + format_number(c.k),
      "dt=" + format_number(c.dt),
      "horizon=" + format_number(c.horizon),
      "n_traj=" + std::to_string(c.n_traj),
      "eta=" + format_number(c.eta),
      "gamma_meas=" + format_number(c.gamma_meas),
      "dephasing_amp=" + format_number(c.dephasing_amp),
      "dephasing_dwell=" + format_number(c.dephasing_dwell),
      "seed=" + std::to_string(c.seed),
      "initial_state=" + c.initial_state,
      "output_dir=" + c.output_dir,
      "checkpoint_every=" + format_number(c.checkpoint_every),
      std::string("compare=") + (c.compare ? "true" : "false"),
      "threads=" + std::to_string(c.threads),
  };
}

/// FNV-1a over the config echo, printed in hex.
inline std::string config_fingerprint(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& line : config_lines(c))
    for (char ch : line + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline DensityMatrix resolve_initial_state(const std::string& desc, const SystemSpec& spec) {
  const Eigen::Index n = spec.dim();
  if (desc == "rho1" || desc == "rho2") {
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    d[desc == "rho1" ? 1 : 0] = 1.0;
    return DensityMatrix::diagonal(d);
  }
  if (desc == "target") return spec.target;
  if (desc == "mixed") return DensityMatrix::maximally_mixed(n);
  if (desc.rfind("diag:", 0) == 0) {
    const auto d = detail::parse_list(desc.substr(5));
    if (static_cast<Eigen::Index>(d.size()) != n)
      throw ConfigError("diag initial state needs " + std::to_string(n) + " entries");
    return DensityMatrix::diagonal(d);
  }
  if (desc.rfind("matrix:", 0) == 0) {
    const auto v = detail::parse_list(desc.substr(7));
    if (static_cast<Eigen::Index>(v.size()) != 2 * n * n)
      throw ConfigError("matrix initial state needs " + std::to_string(2 * n * n) + " numbers");
    CMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto at = static_cast<std::size_t>(2 * (i * n + j));
        m(i, j) = Complex(v[at], v[at + 1]);
      }
    return DensityMatrix::from_matrix(m);
  }
  throw ConfigError("unknown initial state '" + desc + "'");
}

inline SystemSpec system_for(const ExperimentConfig& c) {
  return two_qubit_bell_system(c.eta, c.gamma_meas);
}

/// Per-step series of one trajectory.
struct TrajectorySeries {
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> v1;
  std::vector<double> u2;
  std::vector<double> y;
};

/// Worst physicality defects over every sanitized state of a trajectory.
struct TrajectoryAudit {
  double max_hermiticity = 0.0;
  double max_trace_error = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  std::size_t states = 0;

  void absorb(const StateDefects& d) {
    max_hermiticity = std::max(max_hermiticity, d.hermiticity);
    max_trace_error = std::max(max_trace_error, d.trace);
    min_eigenvalue = std::min(min_eigenvalue, d.min_eigenvalue);
    ++states;
  }
  void absorb(const TrajectoryAudit& o) {
    max_hermiticity = std::max(max_hermiticity, o.max_hermiticity);
    max_trace_error = std::max(max_trace_error, o.max_trace_error);
    min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
    states += o.states;
  }
  bool physical() const {
    return max_hermiticity <= kTolHermitianState && max_trace_error <= kTolTrace &&
           min_eigenvalue >= -kTolPsd;
  }
};

struct TrajectoryOptions {
  bool validate_spec = true;
  bool audit = false;
  /// Override of u2 (open loop) when set; the controller still runs.
  std::optional<double> forced_u2;
  /// Optional per-step observer (step, state after sanitize, applied u2).
  std::function<void(std::size_t, const CMatrix&, double)> observer;
};

struct TrajectoryResult {
  std::uint64_t seed = 0;
  TrajectorySeries series;
  std::optional<TrajectoryAudit> audit;
};

inline std::uint64_t trajectory_seed(std::uint64_t master, std::size_t index) {
  return rng::derive(master, index);
}

/// One closed-loop trajectory. Series has horizon/dt + 1 entries; entry i is
/// (t_i, V, V1, u2 applied on [t_i, t_i + dt), y_i).
inline TrajectoryResult run_trajectory(const ExperimentConfig& cfg, std::uint64_t traj_seed,
                                       const TrajectoryOptions& opt = {}) {
  cfg.validate();
  const SystemSpec spec = system_for(cfg);
  if (opt.validate_spec) validate_hamiltonians(spec);
  const NoiseModel noise = cfg.noise();
  const IntegratorConfig icfg = cfg.integrator();
  const std::size_t n_steps = icfg.steps();

  DelayBuffer buffer(cfg.tau, cfg.dt);
  ControllerState ctrl = ControllerState::make(cfg.strategy, cfg.gamma, cfg.k, spec.dim());

  TrajectoryState state;
  state.rho = sanitize(resolve_initial_state(cfg.initial_state, spec)).matrix();
  state.rng_stream = traj_seed;

  TrajectoryResult result;
  result.seed = traj_seed;
  TrajectorySeries& s = result.series;
  for (auto* v : {&s.t, &s.v, &s.v1, &s.u2, &s.y}) v->reserve(n_steps + 1);
  TrajectoryAudit audit;
  if (opt.audit) audit.absorb(inspect_state(state.rho));

  try {
    for (std::size_t i = 0;; ++i) {
      buffer.push(state.rho);
      const PolicyDecision d = apply_policy(ctrl, buffer.delayed_at_step(i), spec);
      ctrl = d.next;
      const double u2 = opt.forced_u2 ? *opt.forced_u2 : d.u2;
      s.t.push_back(static_cast<double>(i) * cfg.dt);
      s.v.push_back(distance_v(state.rho, spec.target));
      s.v1.push_back(lyapunov_v1(state.rho));
      s.u2.push_back(u2);
      s.y.push_back(state.y);
      if (opt.observer) opt.observer(i, state.rho, u2);
      if (i == n_steps) break;

      const double dW = wiener_increment(traj_seed, i, cfg.dt);
      state = em_step(state, u2, spec, noise, icfg, dW);
      if ((i + 1) % static_cast<std::size_t>(icfg.sanitize_every) == 0) {
        state.rho = sanitize(state.rho).matrix();
        if (opt.audit) audit.absorb(inspect_state(state.rho));
      }
    }
  } catch (const NumericalBlowup& e) {
    throw NumericalBlowup(e.step(), std::string(e.what()) + " [config " + config_fingerprint(cfg) +
                                      ", seed " + std::to_string(traj_seed) + "]");
  } catch (const IntegrationDiverged& e) {
    throw IntegrationDiverged(std::string(e.what()) + " [config " + config_fingerprint(cfg) +
                              ", seed " + std::to_string(traj_seed) + "]");
  }
  if (opt.audit) result.audit = audit;
  return result;
}

struct EnsembleSummary {
  ExperimentConfig config;
  std::vector<double> t;  ///< checkpoint times
  std::vector<double> v_mean;
  std::vector<double> v_stderr;
  std::vector<std::vector<double>> checkpoint_v;  ///< [trajectory][checkpoint]
  std::vector<TrajectorySeries> samples;          ///< first two trajectories in full
  std::vector<double> final_v;
  std::vector<std::uint64_t> seeds;
  std::size_t tau_steps = 0;
  double tau_mismatch = 0.0;
  double wall_time_s = 0.0;
  std::optional<TrajectoryAudit> audit;
  std::optional<LmiSearchResult> lmi;
};

inline std::vector<std::size_t> checkpoint_indices(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.integrator().steps();
  const auto stride = static_cast<std::size_t>(std::max<long long>(1, std::llround(cfg.checkpoint_every / cfg.dt)));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i <= n; i += stride) idx.push_back(i);
  if (idx.back() != n) idx.push_back(n);
  return idx;
}

struct EnsembleOptions {
  bool audit = false;
};

/// Runs cfg.n_traj trajectories; trajectory i uses trajectory_seed(cfg.seed, i).
/// Aggregation happens in trajectory order, so the summary does not depend
/// on the number of worker threads.
inline EnsembleSummary run_ensemble(const ExperimentConfig& cfg, const EnsembleOptions& eopt = {}) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  validate_hamiltonians(system_for(cfg));

  const std::size_t m = cfg.n_traj;
  const auto cps = checkpoint_indices(cfg);
  std::vector<std::vector<double>> cp_v(m);
  std::vector<double> final_v(m, 0.0);
  std::vector<TrajectorySeries> samples(std::min<std::size_t>(2, m));
  std::vector<std::optional<TrajectoryAudit>> audits(m);
  std::vector<std::uint64_t> seeds(m);
  std::vector<std::exception_ptr> errors(m);
  for (std::size_t i = 0; i < m; ++i) seeds[i] = trajectory_seed(cfg.seed, i);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    TrajectoryOptions opt;
    opt.validate_spec = false;
    opt.audit = eopt.audit;
    for (std::size_t i = next++; i < m; i = next++) {
      try {
        TrajectoryResult r = run_trajectory(cfg, seeds[i], opt);
        auto& row = cp_v[i];
        row.reserve(cps.size());
        for (std::size_t c : cps) row.push_back(r.series.v[c]);
        final_v[i] = r.series.v.back();
        audits[i] = r.audit;
        if (i < samples.size()) samples[i] = std::move(r.series);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n_workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, m));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<std::uint64_t> failed;
  std::string first_error;
  for (std::size_t i = 0; i < m; ++i)
    if (errors[i]) {
      failed.push_back(seeds[i]);
      if (first_error.empty()) {
        try {
          std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
          first_error = e.what();
        }
      }
    }
  if (!failed.empty())
    throw PartialResults(failed, std::to_string(failed.size()) + " of " + std::to_string(m) +
                                     " trajectories failed; first: " + first_error);

  EnsembleSummary out;
  out.config = cfg;
  out.seeds = seeds;
  out.final_v = final_v;
  out.samples = std::move(samples);
  for (std::size_t c = 0; c < cps.size(); ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += cp_v[i][c];
    const double mean = sum / static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) ss += (cp_v[i][c] - mean) * (cp_v[i][c] - mean);
    const double se = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m)) : 0.0;
    out.t.push_back(static_cast<double>(cps[c]) * cfg.dt);
    out.v_mean.push_back(std::clamp(mean, 0.0, 1.0));
    out.v_stderr.push_back(se);
  }
  out.checkpoint_v = std::move(cp_v);
  if (eopt.audit) {
    TrajectoryAudit all;
    for (const auto& a : audits)
      if (a) all.absorb(*a);
    out.audit = all;
  }
  const DelayBuffer probe(cfg.tau, cfg.dt);
  out.tau_steps = probe.lag_steps();
  out.tau_mismatch = probe.quantization_error();
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Mean V at the checkpoint closest to time t.
inline std::size_t checkpoint_at(const EnsembleSummary& s, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.t.size(); ++i)
    if (std::abs(s.t[i] - t) < std::abs(s.t[best] - t)) best = i;
  return best;
}

inline std::vector<std::string> meta_lines(const EnsembleSummary& s) {
  std::vector<std::string> lines = config_lines(s.config);
  lines.push_back("system=two_qubit_bell");
  lines.push_back("scheme=euler_maruyama");
  lines.push_back("sanitize_every=1");
  lines.push_back("delay_history=hold_initial");
  lines.push_back("tau_steps=" + std::to_string(s.tau_steps));
  lines.push_back("tau_mismatch=" + format_number(s.tau_mismatch));
  lines.push_back("dephasing_model=piecewise_constant_gaussian");
  lines.push_back("seed_derivation=counter_splitmix64");
  lines.push_back("checkpoints=" + std::to_string(s.t.size()));
  lines.push_back(std::string("version=") + kVersion);
  lines.push_back("config_fingerprint=" + config_fingerprint(s.config));
  lines.push_back("wall_time_s=" + format_number(s.wall_time_s));
  if (s.lmi)
    for (auto& l : lmi_report_lines(*s.lmi)) lines.push_back(l);
  return lines;
}

namespace detail {
inline void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string sample_csv(const TrajectorySeries& s) {
  std::string body = "t,v,u2,y\n";
  for (std::size_t i = 0; i < s.t.size(); ++i)
    body += format_number(s.t[i]) + "," + format_number(s.v[i]) + "," + format_number(s.u2[i]) +
            "," + format_number(s.y[i]) + "\n";
  return body;
}
}  // namespace detail

inline std::string summary_csv(const EnsembleSummary& s) {
  std::string body = "t,v_mean,v_stderr\n";
  for (std::size_t i = 0; i < s.t.size(); ++i)
    body += format_number(s.t[i]) + "," + format_number(s.v_mean[i]) + "," +
            format_number(s.v_stderr[i]) + "\n";
  return body;
}

/// Writes summary.csv, sample_1.csv, sample_2.csv (when present) and meta.txt.
inline std::vector<std::filesystem::path> export_csv(const EnsembleSummary& s,
                                                     const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  written.push_back(dir / "summary.csv");
  detail::write_file(written.back(), summary_csv(s));
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    written.push_back(dir / ("sample_" + std::to_string(i + 1) + ".csv"));
    detail::write_file(written.back(), detail::sample_csv(s.samples[i]));
  }
  std::string meta;
  for (const auto& l : meta_lines(s)) meta += l + "\n";
  written.push_back(dir / "meta.txt");
  detail::write_file(written.back(), meta);
  return written;
}

struct SummaryTable {
  std::vector<double> t;
  std::vector<double> v_mean;
  std::vector<double> v_stderr;
};

inline SummaryTable read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "t,v_mean,v_stderr")
    throw IoError(path.string() + ": unexpected header");
  SummaryTable table;
  while (std::getline(in, line)) {
    const auto vals = detail::parse_list(line);
    if (vals.size() != 3) throw IoError(path.string() + ": malformed row '" + line + "'");
    table.t.push_back(vals[0]);
    table.v_mean.push_back(vals[1]);
    table.v_stderr.push_back(vals[2]);
  }
  return table;
}

}  // namespace qfb
