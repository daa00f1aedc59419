#include <algorithm>
#include <bit>

#include "slln/kernels.hpp"

namespace slln::kernels::serial {

Matrix expansion_sum(const DecompositionContext& ctx) {
  const std::uint64_t count = std::uint64_t{1} << ctx.n();
  Matrix sum = Matrix::Zero(ctx.expected().rows(), ctx.expected().cols());
  for (std::uint64_t mask = 0; mask < count; ++mask) sum += ctx.term(mask);
  return sum;
}

std::vector<std::uint64_t> covering_tuple_counts(unsigned n) {
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<std::uint64_t> counts(4 * n + 1, 0);
  for (std::uint32_t p = 1; p <= full; ++p) {
    for (std::uint32_t pp = 1; pp <= full; ++pp) {
      for (std::uint32_t q = 1; q <= full; ++q) {
        for (std::uint32_t qq = 1; qq <= full; ++qq) {
          if ((p & ~(pp | q | qq)) || (pp & ~(p | q | qq)) || (q & ~(p | pp | qq)) ||
              (qq & ~(p | pp | q))) {
            continue;
          }
          ++counts[std::popcount(p) + std::popcount(pp) + std::popcount(q) + std::popcount(qq)];
        }
      }
    }
  }
  return counts;
}

double martingale_worst_average(const GeneratorEnsemble& ensemble, double t, std::size_t n,
                                const Matrix& x) {
  const auto atoms = static_cast<std::uint32_t>(ensemble.atom_count());
  double worst = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<std::uint32_t> prefix(k - 1, 0);
    while (true) {
      worst = std::max(worst, martingale_property_check(ensemble, t, n, k, x, prefix).average_norm);
      // Mixed-radix increment over all atom prefixes.
      std::size_t pos = 0;
      while (pos < prefix.size() && ++prefix[pos] == atoms) prefix[pos++] = 0;
      if (pos == prefix.size()) break;
    }
  }
  return worst;
}

std::vector<TrialRecord> sweep(const PreparedSweep& sweep) {
  std::vector<TrialRecord> records;
  records.reserve(sweep.trials());
  for (std::size_t trial = 0; trial < sweep.trials(); ++trial) records.push_back(sweep.measure(trial));
  return records;
}

}  // namespace slln::kernels::serial
