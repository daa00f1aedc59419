#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "slln/random_generators.hpp"
#include "slln/standard_suite.hpp"
#include "test_support.hpp"

namespace slln {
namespace {

using testing::square;

const SpaceModel kL2 = SpaceModel::sequence(2, 2);

TEST(Distribution, ValidatesProbabilitiesAndShapes) {
  EXPECT_THROW(DiscreteOperatorDistribution({identity(2)}, {0.9}), InputError);
  EXPECT_THROW(DiscreteOperatorDistribution({identity(2), identity(2)}, {1.5, -0.5}), InputError);
  EXPECT_THROW(DiscreteOperatorDistribution({identity(2), identity(3)}, {0.5, 0.5}), InputError);
  EXPECT_THROW(DiscreteOperatorDistribution({}, {}), InputError);
}

TEST(Expectation, SingleAtom) {
  const Matrix m = square({{1, 2}, {3, 4}});
  EXPECT_EQ(expectation(DiscreteOperatorDistribution({m}, {1.0})), m);
}

TEST(Expectation, SymmetricPairCancels) {
  const Matrix d = square({{0, 1}, {2, 0}});
  EXPECT_EQ(max_abs(expectation(DiscreteOperatorDistribution({d, -d}, {0.5, 0.5}))), 0.0);
}

TEST(Expectation, WeightedScalars) {
  const Matrix e = expectation(DiscreteOperatorDistribution({identity(2), 3.0 * identity(2)}, {0.25, 0.75}));
  EXPECT_LE(max_abs(e - 2.5 * identity(2)), 1e-15);
}

TEST(SymmetricEnsemble, NoPerturbationsIsDeterministic) {
  const Matrix m = square({{0, 1}, {-1, 0}});
  const auto ens = build_symmetric_ensemble(m, {}, {}, kL2);
  EXPECT_EQ(ens.atom_count(), 1u);
  EXPECT_TRUE(ens.is_deterministic());
  EXPECT_EQ(ens.mean(), m);
}

TEST(SymmetricEnsemble, NilpotentPairHasZeroMean) {
  const Matrix n = square({{0, 1}, {0, 0}});
  const auto ens = build_symmetric_ensemble(Matrix::Zero(2, 2), {n}, {1.0}, kL2);
  EXPECT_EQ(ens.atom_count(), 2u);
  EXPECT_EQ(max_abs(ens.mean()), 0.0);
  EXPECT_NEAR(ens.rho(), 1.0, 1e-15);
}

TEST(SymmetricEnsemble, BudgetCoversEveryAtom) {
  const Matrix m = square({{1, 0}, {0, -1}});
  const Matrix d = square({{0, 1}, {0, 0}});
  const auto ens = build_symmetric_ensemble(m, {d}, {1.0}, kL2);
  for (std::size_t w = 0; w < ens.atom_count(); ++w) {
    Eigen::JacobiSVD<Matrix> svd(ens.atom(w));
    EXPECT_GE(ens.rho() + 1e-10, svd.singularValues()(0));
  }
  // Both atoms have spectral norm (1 + sqrt 5) / 2.
  EXPECT_NEAR(ens.rho(), (1 + std::sqrt(5.0)) / 2, 1e-12);
}

TEST(SymmetricEnsemble, DyadicWeightsGiveTheMeanExactly) {
  // Dyadic entries and weights keep every sum and product exact in binary.
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> quarter(-12, 12);
  auto dyadic = [&] {
    Matrix a(3, 3);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = quarter(rng) / 4.0;
    return a;
  };
  const Matrix m = dyadic();
  const Matrix d1 = dyadic();
  const Matrix d2 = dyadic();
  const auto ens = build_symmetric_ensemble(m, {d1, d2}, {0.25, 0.5}, SpaceModel::sequence(1, 3));
  EXPECT_EQ(ens.atom_count(), 5u);
  EXPECT_EQ(ens.mean(), m);
}

TEST(SymmetricEnsemble, RejectsBadWeightsAndUncertifiableModels) {
  const Matrix d = square({{0, 1}, {0, 0}});
  EXPECT_THROW(build_symmetric_ensemble(Matrix::Zero(2, 2), {d}, {1.5}, kL2), InputError);
  EXPECT_THROW(build_symmetric_ensemble(Matrix::Zero(2, 2), {d}, {0.0}, kL2), InputError);
  EXPECT_THROW(build_symmetric_ensemble(Matrix::Zero(2, 2), {d}, {1.0}, SpaceModel::sequence(3, 2)),
               CapabilityError);
}

TEST(Sampling, SingleAtomAlwaysZero) {
  const auto ens = build_symmetric_ensemble(identity(2), {}, {}, kL2);
  const auto path = sample_iid(ens, 100, 5);
  for (auto i : path.indices) EXPECT_EQ(i, 0u);
}

TEST(Sampling, DeterministicAndPrefixStable) {
  const auto ens = nilpotent_ensemble(kL2, 1.0).ensemble;
  const auto a = sample_iid(ens, 1000, 42);
  const auto b = sample_iid(ens, 1000, 42);
  const auto c = sample_iid(ens, 5000, 42);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_TRUE(std::equal(a.indices.begin(), a.indices.end(), c.indices.begin()));
  EXPECT_NE(a.indices, sample_iid(ens, 1000, 43).indices);
}

TEST(Sampling, FairCoinFrequency) {
  const auto ens = nilpotent_ensemble(kL2, 1.0).ensemble;
  const auto path = sample_iid(ens, 100000, 7);
  const double freq = std::count(path.indices.begin(), path.indices.end(), 0u) / 1e5;
  EXPECT_GE(freq, 0.49);
  EXPECT_LE(freq, 0.51);
}

TEST(Sampling, FrequenciesConvergeForUnevenLaw) {
  std::mt19937_64 rng(3);
  const auto dist = testing::random_law(5, 2, false, rng);
  const auto ens = GeneratorEnsemble::certify(dist, kL2);
  constexpr double kT = 1e5;
  const auto path = sample_iid(ens, static_cast<std::size_t>(kT), 11);
  for (std::uint32_t w = 0; w < 5; ++w) {
    const double freq = std::count(path.indices.begin(), path.indices.end(), w) / kT;
    EXPECT_LE(std::abs(freq - dist.probs()[w]), 4 * std::sqrt(std::log(kT) / kT));
  }
}

TEST(Sampling, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}

TEST(Lemmas, IndependenceExamples) {
  const Matrix n = square({{0, 1}, {0, 0}});
  const DiscreteOperatorDistribution pm({n, -n}, {0.5, 0.5});
  EXPECT_EQ(check_independence_product(pm, pm).deviation, 0.0);
  std::mt19937_64 rng(2);
  const DiscreteOperatorDistribution det({testing::gaussian_matrix(2, 2, false, rng)}, {1.0});
  EXPECT_TRUE(check_independence_product(det, testing::random_law(3, 2, false, rng)).passed());
}

TEST(Lemmas, RandomEnsemblesPassEveryCheck) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dim = 2 + trial % 5;
    const bool complex = trial % 2 == 1;
    const auto a = testing::random_law(3, dim, complex, rng);
    const auto b = testing::random_law(2, dim, complex, rng);
    const Matrix x = testing::gaussian_matrix(dim, 1, complex, rng);
    const DiscreteElementDistribution xi({testing::gaussian_matrix(dim, 1, complex, rng),
                                          testing::gaussian_matrix(dim, 1, complex, rng)},
                                         {0.3, 0.7});
    EXPECT_TRUE(check_independence_product(a, b).passed());
    EXPECT_TRUE(check_expectation_action(a, x).passed());
    EXPECT_TRUE(check_adjoint_expectation(a).passed());
    EXPECT_TRUE(check_random_element_action(a, xi).passed());
  }
}

TEST(Lemmas, TrivialCases) {
  std::mt19937_64 rng(5);
  const auto a = testing::random_law(3, 3, true, rng);
  EXPECT_EQ(check_expectation_action(a, Matrix::Zero(3, 1)).deviation, 0.0);
  EXPECT_EQ(check_adjoint_expectation(a).deviation, 0.0);
  const Matrix v = testing::gaussian_matrix(3, 1, true, rng);
  const DiscreteElementDistribution symmetric({v, -v}, {0.5, 0.5});
  EXPECT_LE(check_random_element_action(a, symmetric).deviation, 1e-13);
}

}  // namespace
}  // namespace slln
