// qfb: run delayed-feedback ensembles, search the stability LMI, validate
// Hamiltonians.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qfb/qfb.hpp"

namespace {

struct Source {
  std::string preset;
  std::string config;
};

qfb::ExperimentConfig resolve(const Source& src) {
  if (!src.preset.empty() && !src.config.empty())
    throw qfb::ConfigError("use either --preset or --config, not both");
  if (!src.config.empty()) return qfb::load_config(src.config);
  if (!src.preset.empty()) return qfb::preset(src.preset);
  throw qfb::ConfigError("one of --preset or --config is required");
}

void print_summary(const qfb::EnsembleSummary& s, const std::filesystem::path& dir) {
  const std::size_t mid = qfb::checkpoint_at(s, s.config.horizon / 2.0);
  std::printf("%s [%s] n=%zu  V(T/2)=%.6g +- %.3g  V(T)=%.6g +- %.3g  wall=%.1fs -> %s\n",
              s.config.name.c_str(), qfb::to_string(s.config.strategy), s.config.n_traj,
              s.v_mean[mid], s.v_stderr[mid], s.v_mean.back(), s.v_stderr.back(), s.wall_time_s,
              dir.string().c_str());
}

int run_cmd(const Source& src, std::optional<std::uint64_t> seed, const std::string& out,
            std::optional<std::size_t> n_traj, std::optional<unsigned> threads, bool with_lmi,
            std::size_t lmi_budget) {
  qfb::ExperimentConfig cfg = resolve(src);
  if (seed) cfg.seed = *seed;
  if (n_traj) cfg.n_traj = *n_traj;
  if (threads) cfg.threads = *threads;
  if (!out.empty()) cfg.output_dir = out;
  cfg.validate();

  std::optional<qfb::LmiSearchResult> lmi;
  if (with_lmi) {
    qfb::SearchOptions opt;
    opt.budget = lmi_budget;
    lmi = qfb::search_feasible({cfg.tau, cfg.k}, opt);
  }

  std::vector<qfb::ExperimentConfig> arms;
  if (cfg.compare) {
    for (auto strategy : {qfb::Strategy::bang_bang, qfb::Strategy::switching_lyapunov}) {
      qfb::ExperimentConfig arm = cfg;
      arm.strategy = strategy;
      arm.output_dir = (std::filesystem::path(cfg.output_dir) / qfb::to_string(strategy)).string();
      arms.push_back(arm);
    }
  } else {
    arms.push_back(cfg);
  }
  for (const auto& arm : arms) {
    qfb::EnsembleSummary s = qfb::run_ensemble(arm);
    s.lmi = lmi;
    qfb::export_csv(s, arm.output_dir);
    print_summary(s, arm.output_dir);
  }
  if (lmi)
    for (const auto& line : qfb::lmi_report_lines(*lmi)) std::printf("%s\n", line.c_str());
  return 0;
}

int lmi_cmd(double tau, double k, std::size_t budget, std::uint64_t seed,
            std::optional<double> bisect) {
  qfb::SearchOptions opt;
  opt.budget = budget;
  opt.seed = seed;
  const auto r = qfb::search_feasible({tau, k}, opt);
  for (const auto& line : qfb::lmi_report_lines(r)) std::printf("%s\n", line.c_str());
  if (bisect) {
    const auto b = qfb::max_stable_delay(k, *bisect, opt);
    switch (b.status) {
      case qfb::DelayBracketStatus::infeasible_at_zero:
        std::printf("max_delay=infeasible_at_zero\n");
        break;
      case qfb::DelayBracketStatus::feasible_at_cap:
        std::printf("max_delay=feasible_at_cap\nmax_delay_cap=%.12g\n", b.feasible_tau);
        break;
      case qfb::DelayBracketStatus::bracketed:
        std::printf("max_delay_lo=%.12g\nmax_delay_hi=%.12g\n", b.feasible_tau, b.infeasible_tau);
        break;
    }
    std::printf("max_delay_searches=%d\n", b.searches);
  }
  return 0;
}

int validate_cmd(const Source& src, int samples) {
  qfb::ExperimentConfig cfg = src.preset.empty() && src.config.empty() ? qfb::preset("fig1") : resolve(src);
  cfg.validate();
  const auto report = qfb::validate_hamiltonians(qfb::system_for(cfg), samples);
  std::printf("target_commutator=%.3g\n", report.target_commutator);
  std::printf("eigenspace_samples=%d min_commutator=%.6g\n", report.family_samples,
              report.min_family_commutator);
  std::printf("commutant_samples=%d min_commutator=%.6g\n", report.commutant_samples,
              report.min_commutant_commutator);
  std::printf("ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed quantum feedback simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qfb::kVersion));

  Source run_src;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> n_traj;
  std::optional<unsigned> threads;
  bool with_lmi = false;
  std::size_t lmi_budget = 10000;
  auto* run = app.add_subcommand("run", "Run an ensemble and write CSV output");
  auto* run_source = run->add_option_group("source");
  run_source->add_option("--preset", run_src.preset, "fig1|fig2|fig3a|fig3b|fig4a|fig4b|fig5");
  run_source->add_option("--config", run_src.config, "key=value config file")->check(CLI::ExistingFile);
  run_source->require_option(1);
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out, "Output directory");
  run->add_option("--trajectories", n_traj, "Number of trajectories")->check(CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_flag("--lmi", with_lmi, "Also search the stability LMI at (tau, k) and record it");
  run->add_option("--lmi-budget", lmi_budget, "Random starts for --lmi");

  double tau = 0.2;
  double k = 1.0;
  std::size_t budget = 10000;
  std::uint64_t lmi_seed = qfb::SearchOptions{}.seed;
  std::optional<double> bisect;
  auto* lmi = app.add_subcommand("lmi", "Search the delay-dependent stability LMI");
  lmi->add_option("--tau", tau, "Delay")->check(CLI::NonNegativeNumber);
  lmi->add_option("--k", k, "Feedback gain")->check(CLI::PositiveNumber);
  lmi->add_option("--budget", budget, "Random starts");
  lmi->add_option("--seed", lmi_seed, "Search seed");
  lmi->add_option("--max-delay", bisect, "Also bisect the largest feasible delay to this precision");

  Source val_src;
  int samples = 1000;
  auto* validate = app.add_subcommand("validate", "Check the Hamiltonian conditions of a config");
  validate->add_option("--preset", val_src.preset, "Preset name");
  validate->add_option("--config", val_src.config, "key=value config file")->check(CLI::ExistingFile);
  validate->add_option("--samples", samples, "Random states per check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(qfb::ErrorCategory::invalid_input);
  }

  try {
    if (*run) return run_cmd(run_src, seed, out, n_traj, threads, with_lmi, lmi_budget);
    if (*lmi) return lmi_cmd(tau, k, budget, lmi_seed, bisect);
    if (*validate) return validate_cmd(val_src, samples);
  } catch (const qfb::ConditionViolation& e) {
    std::cerr << "error [" << qfb::category_name(e.category()) << "] " << e.condition() << ": "
              << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const qfb::Error& e) {
    std::cerr << "error [" << qfb::category_name(e.category()) << "] " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error [internal] " << e.what() << "\n";
    return static_cast<int>(qfb::ErrorCategory::internal);
  }
  return 0;
}
