#include <gtest/gtest.h>

#include "slln/kernels.hpp"
#include "slln/standard_suite.hpp"
#include "test_support.hpp"

namespace slln {
namespace {

GeneratorEnsemble random_ensemble(int dim, std::uint64_t seed) {
  return random_nonnormal_ensemble(SpaceModel::sequence(2, dim), 1.0, seed).ensemble;
}

TEST(Kernels, ExpansionSumAgrees) {
  const auto ens = random_ensemble(3, 2);
  const auto path = sample_iid(ens, 9, 4);
  const DecompositionContext ctx(path, ens, 9, 0.1);
  const Matrix reference = kernels::serial::expansion_sum(ctx);
  EXPECT_LE(max_abs(kernels::omp::expansion_sum(ctx, 1) - reference), 1e-13);
  EXPECT_LE(max_abs(kernels::omp::expansion_sum(ctx, 8) - reference), 1e-13);
  EXPECT_LE(max_abs(reference - product_composition(path, ens, 0.9, 9)), 1e-12);
}

TEST(Kernels, CoveringCountsAgree) {
  for (unsigned n = 1; n <= 5; ++n) {
    const auto reference = kernels::serial::covering_tuple_counts(n);
    EXPECT_EQ(kernels::omp::covering_tuple_counts(n, 1), reference);
    EXPECT_EQ(kernels::omp::covering_tuple_counts(n, 8), reference);
  }
}

TEST(Kernels, MartingaleWorstAverageAgrees) {
  const auto ens = random_ensemble(2, 3);
  const Matrix x = testing::column({1, -0.5});
  const double reference = kernels::serial::martingale_worst_average(ens, 1.0, 4, x);
  EXPECT_LE(reference, 1e-12);
  EXPECT_NEAR(kernels::omp::martingale_worst_average(ens, 1.0, 4, x, 8), reference, 1e-15);
}

TEST(Kernels, SweepIsIndependentOfWorkerCount) {
  const auto ens = random_ensemble(3, 5);
  SweepSpec spec{ens, testing::column({1, 0, 0}), testing::column({0, 1, 0}), PositiveForm::from_gram(Matrix::Identity(3, 3)),
                 TimeGrid(1.0, 5), Centering::limit, 12, 99, 37};
  const PreparedSweep sweep(spec);
  const auto reference = kernels::serial::sweep(sweep);
  ASSERT_EQ(reference.size(), 37u);
  for (int workers : {1, 2, 8}) EXPECT_EQ(kernels::omp::sweep(sweep, workers), reference);
  for (std::size_t t = 0; t < reference.size(); ++t) {
    EXPECT_EQ(reference[t].trial, t);
    EXPECT_EQ(reference[t].seed, derive_seed(99, t));
    EXPECT_EQ(reference[t], sweep.measure(t));
  }
}

TEST(Kernels, DefaultWorkers) {
  kernels::set_default_workers(3);
  EXPECT_EQ(kernels::default_workers(), 3);
  kernels::set_default_workers(0);
  EXPECT_EQ(kernels::default_workers(), 0);
}

}  // namespace
}  // namespace slln
