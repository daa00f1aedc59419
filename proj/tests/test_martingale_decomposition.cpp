#include <bit>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "slln/martingale_decomposition.hpp"
#include "slln/standard_suite.hpp"
#include "test_support.hpp"

namespace slln {
namespace {

const SpaceModel kL2 = SpaceModel::sequence(2, 2);

std::uint32_t plus_atom(const GeneratorEnsemble& nil) { return nil.atom(0)(1, 0).real() > 0 ? 0u : 1u; }

GeneratorEnsemble random_three_atom(Eigen::Index dim, std::uint64_t seed) {
  return random_nonnormal_ensemble(SpaceModel::sequence(2, static_cast<int>(dim)), 1.0, seed).ensemble;
}

TEST(SubsetIndexTest, ValidatesMembers) {
  EXPECT_THROW(SubsetIndex(3, {0}), InputError);
  EXPECT_THROW(SubsetIndex(3, {4}), InputError);
  EXPECT_THROW(SubsetIndex(3, {2, 2}), InputError);
  EXPECT_THROW(SubsetIndex(3, {3, 1}), InputError);
  const SubsetIndex p(5, {2, 5});
  EXPECT_EQ(p.max(), 5u);
  EXPECT_EQ(p.mask(), 0b10010u);
  EXPECT_EQ(SubsetIndex::from_mask(5, 0b10010).members(), p.members());
  EXPECT_TRUE(SubsetIndex(4, {}).empty());
  EXPECT_EQ(SubsetIndex(4, {}).max(), 0u);
}

TEST(Delta, DeterministicVanishes) {
  const auto det = deterministic_ensemble(kL2, 1.0).ensemble;
  EXPECT_EQ(max_abs(delta(sample_iid(det, 3, 1), det, 2, 0.7)), 0.0);
}

TEST(Delta, NilpotentPlusAtom) {
  const auto nil = nilpotent_ensemble(kL2, 1.0).ensemble;
  const auto path = path_from_indices(nil, {plus_atom(nil)});
  EXPECT_LE(max_abs(delta(path, nil, 1, 0.6) - 0.6 * nil.atom(plus_atom(nil))), 1e-15);
}

TEST(Delta, AtomAverageIsZero) {
  const auto ens = random_three_atom(4, 12);
  Matrix avg = Matrix::Zero(4, 4);
  for (std::uint32_t w = 0; w < ens.atom_count(); ++w) {
    avg += ens.dist().probs()[w] * delta(path_from_indices(ens, {w}), ens, 1, 0.9);
  }
  EXPECT_LE(max_abs(avg), 1e-13);
}

TEST(TermF, EmptySetOfDeterministicIsTheSemigroup) {
  const auto det = deterministic_ensemble(kL2, 1.0).ensemble;
  const auto path = sample_iid(det, 4, 2);
  const auto term = term_F(path, det, SubsetIndex(4, {}), 0.25);
  EXPECT_LE(max_abs(term.value - expm(det.mean(), 1.0)), 1e-14);
}

TEST(TermF, FullSetOfNilpotentVanishes) {
  const auto nil = nilpotent_ensemble(kL2, 1.0).ensemble;
  const auto path = sample_iid(nil, 3, 2);
  EXPECT_EQ(max_abs(term_F(path, nil, SubsetIndex(3, {1, 2, 3}), 0.5).value), 0.0);
}

TEST(TermF, MiddleSingletonMatchesDirectProduct) {
  const auto ens = random_three_atom(3, 4);
  const auto path = sample_iid(ens, 3, 8);
  const double s = 0.3;
  const Matrix f = expected_semigroup(ens, s);
  const Matrix d2 = expm(path.generator(ens, 2), s) - f;
  EXPECT_LE(max_abs(term_F(path, ens, SubsetIndex(3, {2}), s).value - f * d2 * f), 1e-15);
  EXPECT_THROW(term_F(path, ens, SubsetIndex(4, {2}), s), InputError);
}

TEST(ExpansionIdentity, SingleFactor) {
  const auto ens = random_three_atom(2, 1);
  const auto r = expansion_identity_check(sample_iid(ens, 1, 3), ens, 0.5, 1);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.max_deviation, 1e-15);
}

TEST(ExpansionIdentity, DeterministicReducesToSemigroupLaw) {
  const auto det = deterministic_ensemble(kL2, 1.0).ensemble;
  const auto r = expansion_identity_check(sample_iid(det, 6, 3), det, 0.5, 6);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.empty_term_deviation, 1e-14);
}

TEST(ExpansionIdentity, RandomTenByFour) {
  const auto ens = random_three_atom(4, 5);
  const auto r = expansion_identity_check(sample_iid(ens, 10, 9), ens, 0.7, 10);
  EXPECT_LE(r.max_deviation, 1e-10);
  EXPECT_LE(r.empty_term_deviation, 1e-12);
}

TEST(ExpansionIdentity, CapsEnumeration) {
  const auto ens = random_three_atom(2, 5);
  EXPECT_THROW(expansion_identity_check(sample_iid(ens, 15, 9), ens, 0.7, 15), CapabilityError);
}

TEST(Mu, DeterministicVanishes) {
  const auto det = deterministic_ensemble(kL2, 1.0).ensemble;
  EXPECT_LE(max_abs(mu(sample_iid(det, 5, 1), det, 1.0, 5, Matrix::Ones(2, 1))), 1e-14);
}

TEST(Mu, SingleNilpotentStep) {
  const auto nil = nilpotent_ensemble(kL2, 1.0).ensemble;
  const Matrix x = Matrix::Ones(2, 1);
  const auto path = path_from_indices(nil, {plus_atom(nil)});
  EXPECT_LE(max_abs(mu(path, nil, 0.8, 1, x) - 0.8 * nil.atom(plus_atom(nil)) * x), 1e-15);
}

TEST(Mu, EqualsNonemptySubsetSum) {
  const auto ens = random_three_atom(3, 6);
  const std::size_t n = 6;
  const double t = 1.2;
  const auto path = sample_iid(ens, n, 4);
  const Matrix x = Matrix::Ones(3, 1);
  const DecompositionContext ctx(path, ens, n, t / n);
  Matrix sum = Matrix::Zero(3, 1);
  for (std::uint64_t m = 1; m < (1u << n); ++m) sum += ctx.term(m) * x;
  EXPECT_LE(max_abs(mu(path, ens, t, n, x) - sum), 1e-12);
}

TEST(Increments, FirstIncrementHasOneSubset) {
  const auto ens = random_three_atom(3, 7);
  const std::size_t n = 5;
  const double t = 1.0;
  const auto path = sample_iid(ens, n, 2);
  const Matrix x = Matrix::Ones(3, 1);
  const Matrix f = expected_semigroup(ens, t / n);
  const Matrix expected = (expm(path.generator(ens, 1), t / n) - f) * matrix_power(f, n - 1) * x;
  EXPECT_LE(max_abs(increment_d(path, ens, t, n, 1, x) - expected), 1e-14);
}

TEST(Increments, SumToMuAndAgreeAcrossRoutes) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ens = random_three_atom(2 + trial % 4, 100 + trial);
    const std::size_t n = 1 + trial % 10;
    const double t = 0.5 + 0.1 * trial;
    const auto path = sample_iid(ens, n, 50 + trial);
    const Matrix x = testing::gaussian_matrix(ens.dim(), 1, false, rng);
    const DecompositionContext ctx(path, ens, n, t / n);
    const auto all = all_increments(ctx, x);
    Matrix total = Matrix::Zero(x.rows(), 1);
    for (std::size_t k = 1; k <= n; ++k) {
      const Matrix enumerated = increment_d(path, ens, t, n, k, x);
      EXPECT_LE(max_abs(enumerated - all[k - 1]), 1e-12);
      EXPECT_LE(max_abs(enumerated - increment_d_telescoped(ctx, k, x)), 1e-12);
      total += enumerated;
    }
    EXPECT_LE(max_abs(total - mu(path, ens, t, n, x)), 1e-10);
  }
}

TEST(Increments, DeterministicVanishes) {
  const auto det = deterministic_ensemble(kL2, 1.0).ensemble;
  const auto path = sample_iid(det, 4, 3);
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_LE(max_abs(increment_d(path, det, 1.0, 4, k, Matrix::Ones(2, 1))), 1e-15);
}

TEST(MartingaleProperty, DeterministicAndNilpotent) {
  const Matrix x = Matrix::Ones(2, 1);
  const auto det = deterministic_ensemble(kL2, 1.0).ensemble;
  EXPECT_EQ(martingale_property_check(det, 1.0, 4, 3, x, {0, 0}).average_norm, 0.0);
  const auto nil = nilpotent_ensemble(kL2, 1.0).ensemble;
  for (std::uint32_t a : {0u, 1u}) {
    for (std::uint32_t b : {0u, 1u}) {
      EXPECT_LE(martingale_property_check(nil, 1.0, 4, 3, x, {a, b}).average_norm, 1e-15);
    }
  }
}

TEST(MartingaleProperty, RandomThreeAtom) {
  const auto ens = random_three_atom(3, 9);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::uint32_t> pick(0, 2);
  const Matrix x = testing::gaussian_matrix(3, 1, false, rng);
  const std::vector<std::uint32_t> prefix{pick(rng), pick(rng), pick(rng)};
  EXPECT_TRUE(martingale_property_check(ens, 1.5, 6, 4, x, prefix).passed());
  EXPECT_THROW(martingale_property_check(ens, 1.5, 6, 4, x, {0}), InputError);
}

TEST(Bounds, EstNormExamples) {
  EXPECT_NEAR(bound_est_norm(3, 0, 0.4, 1.5), std::exp(3 * 0.4 * 1.5), 1e-14);
  EXPECT_EQ(bound_est_norm(3, 2, 0.0, 1.0), 0.0);
  EXPECT_NEAR(bound_est_norm(4, 2, 0.5, 1.0), std::exp(2.0), 1e-14);
}

TEST(Bounds, IncrementClosedForms) {
  // sum_j C(k-1, j-1) z^j = z (1 + z)^{k-1}; k = 3, z = 1 gives 4.
  const auto three = bound_increment(6, 3, 3.0, 1.0, 1.0);  // z = 2 rho t / n = 1
  EXPECT_NEAR(three.binomial_sum / std::exp(3.0), 4.0, 1e-12);
  EXPECT_NEAR(three.intermediate, three.binomial_sum, 1e-12);
  EXPECT_EQ(bound_increment(4, 2, 0.0, 1.0, 2.0).final, 0.0);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      for (double rt : {0.1, 0.5, 1.0, 2.0}) {
        const auto r = bound_increment(n, k, rt, 1.0, 1.5);
        EXPECT_NEAR(r.binomial_sum, r.intermediate, 1e-12 * r.intermediate);
        EXPECT_LE(r.intermediate, r.final * (1 + 1e-12));
      }
    }
  }
}

TEST(Bounds, SuiteHasNoViolationsOnCertifiedModels) {
  for (const auto& family : certified_families()) {
    for (const auto& e : standard_suite(family)) {
      const auto report = run_bound_suite(e.ensemble, 20, 77);
      EXPECT_TRUE(report.certified);
      EXPECT_TRUE(report.passed()) << e.name << ": " << report.violations.front().bound;
      EXPECT_GT(report.checks, 20u);
    }
  }
}

}  // namespace
}  // namespace slln
