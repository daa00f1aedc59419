#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "slln/convergence_lab.hpp"
#include "slln/errors.hpp"
#include "test_support.hpp"

namespace slln {
namespace {

const SpaceModel kL2 = SpaceModel::sequence(2, 2);

ExperimentInputs inputs_for(const NamedEnsemble& named, std::size_t grid_points = 9) {
  ExperimentConfig config;
  config.grid_points = grid_points;
  return resolve_inputs(config, named);
}

double plus_sign(const GeneratorEnsemble& nil, std::uint32_t index) {
  return nil.atom(index)(1, 0).real() > 0 ? 1.0 : -1.0;
}

// Binomial(n, 1/2) law of the walk S_n = 2 B - n, indexed by B.
std::vector<double> walk_pmf(std::size_t n) {
  std::vector<double> pmf(n + 1);
  for (std::size_t b = 0; b <= n; ++b) {
    pmf[b] = std::exp(std::lgamma(n + 1.0) - std::lgamma(b + 1.0) - std::lgamma(n - b + 1.0) -
                      static_cast<double>(n) * std::log(2.0));
  }
  return pmf;
}

// P(|S_{4n}| < 4 |S_n|) with S_{4n} = S_n + an independent S_{3n}.
double exact_decrease_probability(std::size_t n) {
  const auto first = walk_pmf(n);
  const auto rest = walk_pmf(3 * n);
  double p = 0.0;
  for (std::size_t a = 0; a <= n; ++a) {
    const double s = 2.0 * a - static_cast<double>(n);
    for (std::size_t b = 0; b <= 3 * n; ++b) {
      const double tail = 2.0 * b - 3.0 * static_cast<double>(n);
      if (std::abs(s + tail) < 4.0 * std::abs(s)) p += first[a] * rest[b];
    }
  }
  return p;
}

TEST(Inputs, Defaults) {
  const auto named = nilpotent_ensemble(kL2, 1.0);
  const auto in = inputs_for(named);
  EXPECT_EQ(in.x, testing::column({1, 0}));
  EXPECT_EQ(in.functional, testing::column({1, 0}));
  EXPECT_EQ(in.grid.values().size(), 9u);
  ExperimentConfig bad;
  bad.x = testing::column({1, 0, 0});
  EXPECT_THROW(resolve_inputs(bad, named), InputError);
}

TEST(Errors, DeterministicEnsembleHasNoError) {
  const auto named = deterministic_ensemble(kL2, 1.0);
  const auto in = inputs_for(named);
  const auto path = sample_iid(named.ensemble, 64, 3);
  EXPECT_LE(sot_error(path, named.ensemble, in.x, in.grid), 1e-12);
  EXPECT_LE(chernoff_bias(named.ensemble, in.x, in.grid, 1024), 2e-12);
}

TEST(Errors, NilpotentErrorIsTheScaledWalk) {
  const auto named = nilpotent_ensemble(kL2, 1.0);
  const auto in = inputs_for(named);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto path = sample_iid(named.ensemble, 32, seed);
    double walk = 0.0;
    for (auto i : path.indices) walk += plus_sign(named.ensemble, i);
    EXPECT_NEAR(sot_error(path, named.ensemble, in.x, in.grid), std::abs(walk) / 32.0, 1e-14);
  }
  EXPECT_EQ(chernoff_bias(named.ensemble, in.x, in.grid, 16), 0.0);
}

TEST(Errors, MetricsAreConsistent) {
  std::mt19937_64 rng(6);
  const auto named = random_nonnormal_ensemble(SpaceModel::sequence(2, 4), 1.0, 8);
  const auto in = inputs_for(named);
  for (int trial = 0; trial < 20; ++trial) {
    const auto path = sample_iid(named.ensemble, 16, 100 + trial);
    const Matrix f = testing::gaussian_matrix(4, 1, false, rng);
    const double sot = sot_error(path, named.ensemble, in.x, in.grid);
    const double wot = wot_error(path, named.ensemble, in.x, f, in.grid);
    EXPECT_LE(wot, dual_norm(named.ensemble.model(), DualFunctional{f}) * sot * (1 + 1e-12));
    // The identity Gram seminorm is the l2 norm.
    EXPECT_NEAR(form_error(path, named.ensemble, in.x, in.form, in.grid), sot, 1e-12 * (1 + sot));
  }
}

TEST(Sweeps, MedianDecaysLikeInverseRoot) {
  const auto named = random_nonnormal_ensemble(SpaceModel::sequence(2, 3), 1.0, 11);
  const auto in = inputs_for(named);
  const auto sweeps = run_sweeps(in, {16, 256}, 300, 5, Centering::limit, true, true);
  const double ratio = summarize(sweeps[1], std::nullopt).median_error / summarize(sweeps[0], std::nullopt).median_error;
  EXPECT_GT(ratio, 0.15);
  EXPECT_LT(ratio, 0.4);
  for (const auto& r : sweeps[0].records) {
    EXPECT_TRUE(r.sup_error_wot.has_value());
    EXPECT_TRUE(r.sup_error_form.has_value());
    EXPECT_EQ(r.errors.size(), 9u);
  }
}

TEST(Summaries, QuantilesAndTails) {
  SweepResult sweep{7, {}};
  for (int i = 1; i <= 10; ++i) {
    TrialRecord r;
    r.n = 7;
    r.sup_error_sot = i;
    r.sup_error_wot = 0.5 * i;
    sweep.records.push_back(r);
  }
  const auto row = summarize(sweep, 8.0);
  EXPECT_EQ(row.n, 7u);
  EXPECT_DOUBLE_EQ(row.median_error, 5.5);
  EXPECT_DOUBLE_EQ(row.q10, 1.9);
  EXPECT_DOUBLE_EQ(row.q90, 9.1);
  EXPECT_DOUBLE_EQ(row.tail_freq, 0.2);  // 8 itself is not an exceedance
  EXPECT_LT(row.wilson_lo, 0.2);
  EXPECT_GT(row.wilson_hi, 0.2);
  EXPECT_DOUBLE_EQ(summarize(sweep, std::nullopt, ErrorMetric::wot).median_error, 2.75);
  EXPECT_THROW(summarize(sweep, std::nullopt, ErrorMetric::form), InputError);
  EXPECT_THROW(summarize(SweepResult{}, std::nullopt), InputError);
}

TEST(Summaries, ExceedanceGuard) {
  EXPECT_FALSE(exceeds(0.1, 0.1));
  EXPECT_FALSE(exceeds(0.1 * (1 + 1e-12), 0.1));
  EXPECT_TRUE(exceeds(0.1 * (1 + 1e-6), 0.1));
}

TEST(PathStudy, NilpotentMatchesTheRandomWalk) {
  const auto named = nilpotent_ensemble(kL2, 1.0);
  const auto in = inputs_for(named);
  const std::vector<std::size_t> ns{16, 64, 256};
  double fraction = 0.0;
  const int seeds = 400;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto study = path_convergence_study(in, ns, seed);
    const auto path = sample_iid(named.ensemble, 256, derive_seed(seed, 0));
    std::vector<double> walk;
    double s = 0.0;
    for (std::size_t i = 0; i < 256; ++i) {
      s += plus_sign(named.ensemble, path.indices[i]);
      if (i + 1 == 16 || i + 1 == 64 || i + 1 == 256) walk.push_back(std::abs(s) / static_cast<double>(i + 1));
    }
    if (study.degenerate) {
      EXPECT_EQ(walk[0] + walk[1] + walk[2], 0.0);
      continue;
    }
    std::size_t decreased = 0;
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(study.errors[k], walk[k], 1e-14);
    decreased += walk[1] < walk[0] - 1e-12 ? 1 : 0;
    decreased += walk[2] < walk[1] - 1e-12 ? 1 : 0;
    EXPECT_DOUBLE_EQ(study.decrease_fraction, decreased / 2.0);
    EXPECT_EQ(study.contract_met, study.decrease_fraction > 0.8);
    fraction += study.decrease_fraction;
  }
  fraction /= seeds;
  const double expected = 0.5 * (exact_decrease_probability(16) + exact_decrease_probability(64));
  EXPECT_NEAR(fraction, expected, 0.065);
}

TEST(PathStudy, FlagsDegenerateAndConjectureCases) {
  const auto det = deterministic_ensemble(kL2, 1.0);
  const auto study = path_convergence_study(inputs_for(det), {16, 64}, 1);
  EXPECT_TRUE(study.degenerate);
  EXPECT_FALSE(study.slope.has_value());
  EXPECT_FALSE(study.contract_met);

  const auto linf = nilpotent_ensemble(SpaceModel::max_norm(2), 1.0);
  EXPECT_TRUE(path_convergence_study(inputs_for(linf), {16, 64}, 1).conjecture_experiment);
  EXPECT_THROW(path_convergence_study(inputs_for(det), {16}, 1), InputError);
}

TEST(Tails, AnalysisOfKnownFrequencies) {
  const auto named = nilpotent_ensemble(kL2, 1.0);
  const auto in = inputs_for(named);
  std::vector<SweepResult> sweeps;
  const std::vector<std::pair<std::size_t, std::size_t>> plan{{10, 400}, {20, 100}, {40, 25}};
  for (auto [n, hits] : plan) {
    SweepResult s{n, {}};
    for (std::size_t t = 0; t < 1600; ++t) {
      TrialRecord r;
      r.n = n;
      r.sup_error_sot = t < hits ? 2.0 : 0.5;
      s.records.push_back(r);
    }
    sweeps.push_back(std::move(s));
  }
  const auto scan = analyze_tails(in, sweeps, 1.0);
  ASSERT_EQ(scan.rows.size(), 3u);
  EXPECT_DOUBLE_EQ(scan.rows[0].freq, 0.25);
  EXPECT_EQ(scan.rows[2].exceed, 25u);
  EXPECT_TRUE(scan.estimable);
  ASSERT_TRUE(scan.slope.has_value());
  EXPECT_NEAR(*scan.slope, -2.0, 1e-12);
  ASSERT_TRUE(scan.contract_met.has_value());
  EXPECT_TRUE(*scan.contract_met);

  // Five exceedances at the largest n fall below the estimable threshold.
  for (std::size_t t = 5; t < 25; ++t) sweeps[2].records[t].sup_error_sot = 0.5;
  const auto sparse = analyze_tails(in, sweeps, 1.0);
  EXPECT_FALSE(sparse.estimable);
  EXPECT_FALSE(sparse.contract_met.has_value());
}

TEST(Tails, HugeEpsilonIsBelowResolution) {
  const auto named = nilpotent_ensemble(kL2, 1.0);
  const auto scan = tail_scan(inputs_for(named), {16, 32}, 200, 3, 1e6);
  EXPECT_TRUE(scan.below_resolution);
  EXPECT_FALSE(scan.estimable);
  EXPECT_FALSE(scan.slope.has_value());
  EXPECT_FALSE(scan.contract_met.has_value());
  EXPECT_THROW(tail_scan(inputs_for(named), {16}, 10, 3, -1.0), InputError);
}

TEST(Tails, CalibratedEpsilonIsTheFirstMedian) {
  const auto named = nilpotent_ensemble(kL2, 1.0);
  const auto in = inputs_for(named);
  const auto scan = tail_scan(in, {16, 64}, 400, 9, std::nullopt);
  EXPECT_TRUE(scan.epsilon_calibrated);
  EXPECT_DOUBLE_EQ(scan.epsilon, scan.rows[0].median_sup_mu);
  for (const auto& row : scan.rows) {
    EXPECT_LE(row.wilson.lo, row.freq);
    EXPECT_GE(row.wilson.hi, row.freq);
    EXPECT_EQ(row.chernoff_bias, 0.0);
  }
  EXPECT_GT(scan.rows[0].freq, scan.rows[1].freq);
}

TEST(Burkholder, MomentOrder) {
  EXPECT_DOUBLE_EQ(default_moment_order(2.0), 4.0);
  EXPECT_DOUBLE_EQ(default_moment_order(1.5), 6.0);
  EXPECT_THROW(default_moment_order(1.0), InputError);
  EXPECT_THROW(default_moment_order(2.5), InputError);
}

TEST(Burkholder, DeterministicIsDegenerate) {
  const auto named = deterministic_ensemble(kL2, 1.0);
  const auto series = burkholder_ratio(inputs_for(named), {4, 8}, 10, 1, 1.0, 2.0, 4.0);
  EXPECT_TRUE(series.degenerate);
  EXPECT_FALSE(series.contract_met);
}

TEST(Burkholder, SingleStepRatioIsOne) {
  const auto named = random_nonnormal_ensemble(SpaceModel::sequence(2, 3), 1.0, 4);
  const auto series = burkholder_ratio(inputs_for(named), {1}, 50, 2, 1.0, 1.5, 6.0);
  EXPECT_NEAR(series.rows[0].ratio, 1.0, 1e-12);
}

TEST(Burkholder, NilpotentRatioIsTheWalkKurtosis) {
  // mu_n = S_n (t/n) N x and sum ||d||^2 = n (t/n)^2, so lhs / rhs = E S_n^4 / n^2.
  const auto named = nilpotent_ensemble(kL2, 1.0);
  const std::size_t trials = 4000;
  const auto series = burkholder_ratio(inputs_for(named), {4, 16}, trials, 12, 1.0, 2.0, 4.0);
  for (const auto& row : series.rows) {
    const auto pmf = walk_pmf(row.n);
    double m4 = 0.0, m8 = 0.0;
    for (std::size_t b = 0; b <= row.n; ++b) {
      const double s = 2.0 * b - static_cast<double>(row.n);
      m4 += pmf[b] * std::pow(s, 4);
      m8 += pmf[b] * std::pow(s, 8);
    }
    const double n2 = static_cast<double>(row.n * row.n);
    EXPECT_NEAR(m4 / n2, 3.0 - 2.0 / static_cast<double>(row.n), 1e-12);
    const double sd = std::sqrt((m8 - m4 * m4) / trials) / n2;
    EXPECT_NEAR(row.ratio, m4 / n2, 5 * sd);
    EXPECT_NEAR(row.rhs, std::pow(1.0 / static_cast<double>(row.n), 2.0), 1e-15);
  }
  EXPECT_TRUE(series.contract_met);
}

}  // namespace
}  // namespace slln
