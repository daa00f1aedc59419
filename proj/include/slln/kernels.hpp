#pragma once

// Data-parallel kernels. Each has a serial reference in kernels::serial and an
// OpenMP version in kernels::omp; the library calls the OpenMP versions, tests
// compare the two, and bench/ times them.

#include <cstdint>
#include <vector>

#include "slln/martingale_decomposition.hpp"
#include "slln/trial_sweep.hpp"

namespace slln::kernels {

namespace serial {

/// sum over all subsets P of [n] of F_{n,P}(s).
Matrix expansion_sum(const DecompositionContext& ctx);

/// Covering 4-tuples of nonempty subsets of [n], counted by total size.
std::vector<std::uint64_t> covering_tuple_counts(unsigned n);

/// Worst ||E[d_{n,k}(t) | A_1..A_{k-1}]|| over all k <= n and all atom prefixes.
double martingale_worst_average(const GeneratorEnsemble& ensemble, double t, std::size_t n,
                                const Matrix& x);

std::vector<TrialRecord> sweep(const PreparedSweep& sweep);

}  // namespace serial

namespace omp {

/// workers <= 0 uses the OpenMP default team size.
Matrix expansion_sum(const DecompositionContext& ctx, int workers = 0);
std::vector<std::uint64_t> covering_tuple_counts(unsigned n, int workers = 0);
double martingale_worst_average(const GeneratorEnsemble& ensemble, double t, std::size_t n,
                                const Matrix& x, int workers = 0);
/// Records are indexed by trial, so output is identical for every worker count.
std::vector<TrialRecord> sweep(const PreparedSweep& sweep, int workers = 0);

}  // namespace omp

/// Process-wide worker count used by library entry points (0 = OpenMP default).
void set_default_workers(int workers);
int default_workers();

}  // namespace slln::kernels
