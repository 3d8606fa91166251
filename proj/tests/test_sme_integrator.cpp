#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qfb/sme_integrator.hpp"

using namespace qfb;

namespace {

const SystemSpec& bell_spec() {
  static const SystemSpec spec = two_qubit_bell_system();
  return spec;
}

TrajectoryState at(const CMatrix& rho, std::uint64_t stream = 1) {
  TrajectoryState s;
  s.rho = rho;
  s.rng_stream = stream;
  return s;
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(EmStep, TargetIsFixedPoint) {
  const SystemSpec& spec = bell_spec();
  const NoiseModel noise = NoiseModel::from(spec);
  IntegratorConfig cfg;
  for (double dW : {0.0, 0.03, -0.1, 1.7}) {
    const TrajectoryState next = em_step(at(spec.target), 0.0, spec, noise, cfg, dW);
    EXPECT_LT(max_abs(next.rho - spec.target.matrix()), 1e-15);
    EXPECT_DOUBLE_EQ(next.t, cfg.dt);
    EXPECT_EQ(next.step, 1u);
  }
}

TEST(EmStep, MeasurementOffLeavesOnlyH1OnDiagonalState) {
  const SystemSpec& spec = bell_spec();
  const NoiseModel off{1.0, 0.0, 0.0, 0.1};
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  const CMatrix rho = diag({0.1, 0.2, 0.3, 0.4});
  const TrajectoryState next = em_step(at(rho), 0.0, spec, off, cfg, 0.37);
  const CMatrix h1 = spec.h1.matrix();
  const CMatrix expected = rho - kI * (h1 * rho - rho * h1) * cfg.dt;
  EXPECT_LT(max_abs(next.rho - expected), 1e-15);
}

TEST(EmStep, Mu3IncrementMatchesReducedDrift) {
  const SystemSpec& spec = bell_spec();
  const NoiseModel noise = NoiseModel::from(spec);
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double dt : {1e-3, 1e-4}) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    for (int i = 0; i < 50; ++i) {
      const CMatrix rho = oracle::random_state(gen, 4);
      const double u2 = u(gen);
      const TrajectoryState next = em_step(at(rho), u2, spec, noise, cfg, 0.0);
      // mu3 drift written out from the parameterization.
      const auto l = [&](int r, int c) { return rho(r, c).real(); };
      const double drift = l(0, 1) - l(0, 2) + l(1, 3) - l(2, 3) + 2.0 * l(0, 3) * u2;
      const double delta = oracle::mu3(next.rho) - oracle::mu3(rho);
      EXPECT_NEAR(delta, drift * dt, 10.0 * dt * dt);
    }
  }
}

TEST(EmStep, PreservesTraceAndHermiticity) {
  const SystemSpec& spec = bell_spec();
  std::mt19937_64 gen(22);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double amp : {0.0, 0.5}) {
    const NoiseModel noise{0.8, 1.0, amp, 0.1};
    IntegratorConfig cfg;
    for (int i = 0; i < 200; ++i) {
      const CMatrix rho = oracle::random_state(gen, 4);
      TrajectoryState s = at(rho, gen());
      s.t = 0.05 * i;
      const TrajectoryState next = em_step(s, g(gen), spec, noise, cfg, std::sqrt(cfg.dt) * g(gen));
      EXPECT_LT(std::abs(next.rho.trace() - rho.trace()), 1e-12);
      EXPECT_EQ(hermiticity_error(next.rho), 0.0);
    }
  }
}

TEST(EmStep, DeterministicGivenInputs) {
  const SystemSpec& spec = bell_spec();
  const NoiseModel noise{1.0, 1.0, 0.5, 0.1};
  std::mt19937_64 gen(23);
  const CMatrix rho = oracle::random_state(gen, 4);
  IntegratorConfig cfg;
  const auto a = em_step(at(rho, 99), 0.3, spec, noise, cfg, 0.01);
  const auto b = em_step(at(rho, 99), 0.3, spec, noise, cfg, 0.01);
  EXPECT_EQ((a.rho - b.rho).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.y, b.y);
}

TEST(EmStep, RecordAccumulatesMeasurementIncrement) {
  const SystemSpec& spec = bell_spec();
  IntegratorConfig cfg;
  std::mt19937_64 gen(24);
  const CMatrix rho = oracle::random_state(gen, 4);
  const auto next = em_step(at(rho), 0.0, spec, NoiseModel::from(spec), cfg, 0.02);
  EXPECT_NEAR(next.y, measurement_increment(rho, spec, 0.02, cfg.dt), 1e-15);
}

TEST(EmStep, NonFiniteInputRaisesBlowupWithStep) {
  const SystemSpec& spec = bell_spec();
  CMatrix rho = spec.target.matrix();
  rho(1, 1) = std::numeric_limits<double>::quiet_NaN();
  TrajectoryState s = at(rho);
  s.step = 41;
  try {
    em_step(s, 0.0, spec, NoiseModel::from(spec), IntegratorConfig{}, 0.0);
    FAIL() << "expected NumericalBlowup";
  } catch (const NumericalBlowup& e) {
    EXPECT_EQ(e.step(), 42u);
  }
}

TEST(MeasurementIncrement, Examples) {
  const SystemSpec& spec = bell_spec();
  const double dt = 1e-3;
  const double dW = 0.0123;
  EXPECT_NEAR(measurement_increment(spec.target, spec, dW, dt), dW + 2.0 * dt, 1e-15);
  EXPECT_NEAR(measurement_increment(CMatrix::Identity(4, 4) / 4.0, spec, dW, dt), dW, 1e-15);
  EXPECT_NEAR(measurement_increment(diag({0, 1, 0, 0}), spec, dW, dt), dW - 2.0 * dt, 1e-15);
}

TEST(Sanitize, FixedPointOnTarget) {
  const CMatrix rd = bell_spec().target.matrix();
  EXPECT_LT(max_abs(sanitize(rd).matrix() - rd), 1e-14);
}

TEST(Sanitize, ClipsAndRenormalizes) {
  const CMatrix out = sanitize(diag({1.05, -0.05, 0, 0}));
  EXPECT_LT(max_abs(out - diag({1, 0, 0, 0})), 1e-15);
}

TEST(Sanitize, PerturbedMixedStateAgainstEigenClipOracle) {
  std::mt19937_64 gen(25);
  for (int trial = 0; trial < 50; ++trial) {
    // I/4 + E with a prescribed most negative eigenvalue of -1e-6.
    const CMatrix u = oracle::random_unitary(gen, 4);
    const Eigen::Vector4d w(-1e-6, 0.2, 0.3, 0.5 + 1e-6);
    const CMatrix in = u * w.cast<Complex>().asDiagonal() * u.adjoint();
    const CMatrix out = sanitize(in).matrix();
    const StateDefects d = inspect_state(out);
    EXPECT_GE(d.min_eigenvalue, -1e-15);
    EXPECT_LE(d.trace, 1e-14);
    // Oracle: clip to 0, divide by the clipped sum.
    const Eigen::Vector4d clipped = w.cwiseMax(0.0) / w.cwiseMax(0.0).sum();
    const CMatrix expected = u * clipped.cast<Complex>().asDiagonal() * u.adjoint();
    EXPECT_LT((out - expected).norm(), 1e-12);
    EXPECT_LE((out - in).norm(), std::max(10.0 * 1e-6, 1e-12));
  }
}

TEST(Sanitize, SmallTraceDiverges) {
  EXPECT_THROW(sanitize(diag({0.2, 0.1, 0, 0})), IntegrationDiverged);
  EXPECT_THROW(sanitize(diag({0.4, -0.3, 0, 0})), IntegrationDiverged);
}

TEST(Dephasing, DisabledIsZero) {
  const NoiseModel noise{1.0, 1.0, 0.0, 0.1};
  for (double t : {0.0, 0.05, 3.7, 49.9}) EXPECT_EQ(dephasing_sample(noise, t, 5), 0.0);
}

TEST(Dephasing, PiecewiseConstantAndReproducible) {
  const NoiseModel noise{1.0, 1.0, 0.5, 0.1};
  EXPECT_EQ(dephasing_sample(noise, 0.31, 8), dephasing_sample(noise, 0.31, 8));
  EXPECT_EQ(dephasing_sample(noise, 0.30, 8), dephasing_sample(noise, 0.399, 8));
  EXPECT_NE(dephasing_sample(noise, 0.30, 8), dephasing_sample(noise, 0.40, 8));
  EXPECT_NE(dephasing_sample(noise, 0.30, 8), dephasing_sample(noise, 0.30, 9));
}

TEST(Dephasing, VarianceOfRedraws) {
  const NoiseModel noise{1.0, 1.0, 0.5, 0.1};
  const int n = 10000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double b = dephasing_sample(noise, (i + 0.5) * noise.dephasing_dwell, 2024);
    sum += b;
    sum2 += b * b;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_NEAR(var, 0.25, 0.05 * 0.25);
}

TEST(Wiener, MomentsOfIncrements) {
  const double dt = 1e-3;
  const int n = 100000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = wiener_increment(77, static_cast<std::size_t>(i), dt);
    sum += w;
    sum2 += w * w;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 * std::sqrt(dt / n));
  EXPECT_NEAR(sum2 / n, dt, 0.02 * dt);
}

TEST(EnsembleDrift, MaximallyMixedIsInvariant) {
  const SystemSpec& spec = bell_spec();
  const CMatrix mixed = CMatrix::Identity(4, 4) / 4.0;
  for (double u2 : {0.0, 1.0, -3.0})
    EXPECT_LT(max_abs(ensemble_drift_step(mixed, u2, spec, 1e-3) - mixed), 1e-16);
}

TEST(EnsembleDrift, PreservesTrace) {
  const SystemSpec& spec = bell_spec();
  std::mt19937_64 gen(26);
  for (int i = 0; i < 100; ++i) {
    const CMatrix rho = oracle::random_state(gen, 4);
    EXPECT_LT(std::abs(ensemble_drift_step(rho, 1.0, spec, 1e-3).trace() - 1.0), 1e-12);
  }
}

TEST(EnsembleDrift, V1NonincreasingUnderConstantControl) {
  // Forward Euler adds dt^2 ||[H, rho]||_F^2 per step from the unitary part,
  // so the step must be small for the monotone decay to survive.
  const SystemSpec& spec = bell_spec();
  const double dt = 2e-5;
  CMatrix rho = diag({0, 1, 0, 0});
  double prev = lyapunov_v1(rho);
  double worst = -1.0;
  for (int i = 0; i < 10000; ++i) {
    rho = ensemble_drift_step(rho, 1.0, spec, dt);
    const double v1 = lyapunov_v1(rho);
    worst = std::max(worst, v1 - prev);
    prev = v1;
  }
  EXPECT_LE(worst, 1e-8);
  EXPECT_LT(prev, lyapunov_v1(diag({0, 1, 0, 0})));
}

TEST(EnsembleDrift, MatchesEmStepWithoutNoise) {
  const SystemSpec& spec = bell_spec();
  const NoiseModel noise = NoiseModel::from(spec);
  IntegratorConfig cfg;
  std::mt19937_64 gen(27);
  for (int i = 0; i < 50; ++i) {
    const CMatrix rho = oracle::random_state(gen, 4);
    const CMatrix a = ensemble_drift_step(rho, 0.7, spec, cfg.dt);
    const CMatrix b = em_step(at(rho), 0.7, spec, noise, cfg, 0.0).rho;
    EXPECT_LT(max_abs(a - b), 1e-15);
  }
}

TEST(Integration, TargetAbsorption) {
  const SystemSpec& spec = bell_spec();
  const NoiseModel noise = NoiseModel::from(spec);
  IntegratorConfig cfg;
  TrajectoryState s = at(spec.target, 31);
  double worst = 0.0;
  for (std::size_t i = 0; i < 100000; ++i) {
    s = em_step(s, 0.0, spec, noise, cfg, wiener_increment(s.rng_stream, i, cfg.dt));
    s.rho = sanitize(s.rho).matrix();
    worst = std::max(worst, (s.rho - spec.target.matrix()).norm());
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Integration, DistanceIsSupermartingaleWithoutControl) {
  const SystemSpec& spec = bell_spec();
  const NoiseModel noise = NoiseModel::from(spec);
  IntegratorConfig cfg;
  const int m = 400;
  const int stride = 200;
  const int checkpoints = 10;
  // V(rho0) = 0.75 < 1 - gamma for gamma = 0.06.
  const CMatrix rho0 = 0.5 * spec.target.matrix() + 0.5 * diag({0, 1, 0, 0});
  const double v0 = distance_v(rho0, spec.target);
  ASSERT_LT(v0, 0.94);
  std::vector<std::vector<double>> v(checkpoints, std::vector<double>(m));
  for (int j = 0; j < m; ++j) {
    TrajectoryState s = at(rho0, rng::derive(4242, static_cast<std::uint64_t>(j)));
    for (int c = 0; c < checkpoints; ++c) {
      for (int k = 0; k < stride; ++k) {
        s = em_step(s, 0.0, spec, noise, cfg, wiener_increment(s.rng_stream, s.step, cfg.dt));
        s.rho = sanitize(s.rho).matrix();
      }
      v[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = distance_v(s.rho, spec.target);
    }
  }
  // Increments between consecutive checkpoints and from the start.
  for (int c = 0; c < checkpoints; ++c) {
    for (bool from_start : {false, true}) {
      if (from_start && c == 0) continue;
      double sum = 0.0;
      double sum2 = 0.0;
      for (int j = 0; j < m; ++j) {
        const double before = from_start || c == 0 ? v0 : v[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(j)];
        const double d = v[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] - before;
        sum += d;
        sum2 += d * d;
      }
      const double mean = sum / m;
      const double se = std::sqrt(std::max(0.0, sum2 / m - mean * mean) / (m - 1));
      EXPECT_LE(mean, 3.0 * se + 1e-15) << "checkpoint " << c << (from_start ? " from start" : "");
    }
  }
}

TEST(Integration, WeakOrderOneUnderStepHalving) {
  // Terminal mean V for dt, dt/2, dt/4 on coupled Brownian paths. With weak
  // error c dt, the second difference is half the first.
  const SystemSpec& spec = bell_spec();
  const NoiseModel noise = NoiseModel::from(spec);
  const double horizon = 1.0;
  const double dt0 = 0.02;
  const int m = 400;
  const int fine_steps = static_cast<int>(std::llround(horizon / (dt0 / 4)));
  std::vector<double> d1(m), d2(m);
  for (int j = 0; j < m; ++j) {
    const std::uint64_t stream = rng::derive(777, static_cast<std::uint64_t>(j));
    std::vector<double> fine(static_cast<std::size_t>(fine_steps));
    for (int i = 0; i < fine_steps; ++i)
      fine[static_cast<std::size_t>(i)] = wiener_increment(stream, static_cast<std::size_t>(i), dt0 / 4);
    double terminal[3];
    for (int level = 0; level < 3; ++level) {
      const int group = 4 >> level;  // fine increments per step
      IntegratorConfig cfg;
      cfg.dt = dt0 / (1 << level);
      TrajectoryState s = at(diag({0, 1, 0, 0}), stream);
      for (int i = 0; i < fine_steps; i += group) {
        double dW = 0.0;
        for (int k = 0; k < group; ++k) dW += fine[static_cast<std::size_t>(i + k)];
        s = em_step(s, 1.0, spec, noise, cfg, dW);
        s.rho = sanitize(s.rho).matrix();
      }
      terminal[level] = distance_v(s.rho, spec.target);
    }
    d1[static_cast<std::size_t>(j)] = terminal[0] - terminal[1];
    d2[static_cast<std::size_t>(j)] = terminal[1] - terminal[2];
  }
  auto mean_se = [&](const std::vector<double>& x) {
    double s = 0.0, s2 = 0.0;
    for (double v : x) {
      s += v;
      s2 += v * v;
    }
    const double mean = s / m;
    return std::pair{mean, std::sqrt(std::max(0.0, s2 / m - mean * mean) / (m - 1))};
  };
  const auto [m1, se1] = mean_se(d1);
  const auto [m2, se2] = mean_se(d2);
  // Model estimate of the second difference is |m1| / 2; allow 2x that plus noise.
  EXPECT_LE(std::abs(m2), 2.0 * std::abs(m1) / 2.0 + 3.0 * std::hypot(se1, se2))
      << "first difference " << m1 << " +- " << se1 << ", second " << m2 << " +- " << se2;
}

TEST(IntegratorConfig, Validation) {
  IntegratorConfig cfg;
  EXPECT_NO_THROW(cfg.validate(0.2));
  EXPECT_NO_THROW(cfg.validate(0.0));
  cfg.dt = 0.5;
  EXPECT_THROW(cfg.validate(0.2), ConfigError);
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.dt = 1e-3;
  cfg.horizon = 1e-4;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(IntegratorConfig{}.steps(), 50000u);
}
