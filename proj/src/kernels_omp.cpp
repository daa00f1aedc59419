#include <algorithm>
#include <bit>
#include <atomic>
#include <exception>

#include <omp.h>

#include "slln/kernels.hpp"

namespace slln::kernels {

namespace {

std::atomic<int> g_default_workers{0};

int team_size(int workers) {
  if (workers > 0) return workers;
  const int fallback = g_default_workers.load();
  return fallback > 0 ? fallback : omp_get_max_threads();
}

// Rethrows the first exception raised inside a parallel region.
class ErrorSlot {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(slln_error_slot)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace

void set_default_workers(int workers) { g_default_workers.store(std::max(0, workers)); }
int default_workers() { return g_default_workers.load(); }

namespace omp {

Matrix expansion_sum(const DecompositionContext& ctx, int workers) {
  // Fixed chunking and in-order combination keep the result independent of the team size.
  const std::uint64_t count = std::uint64_t{1} << ctx.n();
  const std::uint64_t chunks = std::min<std::uint64_t>(count, 64);
  const auto rows = ctx.expected().rows();
  std::vector<Matrix> partial(chunks, Matrix::Zero(rows, rows));
  ErrorSlot errors;
#pragma omp parallel for num_threads(team_size(workers)) schedule(dynamic)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    errors.run([&] {
      const std::uint64_t lo = count * static_cast<std::uint64_t>(c) / chunks;
      const std::uint64_t hi = count * static_cast<std::uint64_t>(c + 1) / chunks;
      for (std::uint64_t mask = lo; mask < hi; ++mask) partial[c] += ctx.term(mask);
    });
  }
  errors.rethrow();
  Matrix sum = Matrix::Zero(rows, rows);
  for (const auto& p : partial) sum += p;
  return sum;
}

std::vector<std::uint64_t> covering_tuple_counts(unsigned n, int workers) {
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<std::uint64_t> counts(4 * n + 1, 0);
#pragma omp parallel num_threads(team_size(workers))
  {
    std::vector<std::uint64_t> local(counts.size(), 0);
#pragma omp for schedule(dynamic)
    for (std::int64_t pi = 1; pi <= static_cast<std::int64_t>(full); ++pi) {
      const auto p = static_cast<std::uint32_t>(pi);
      for (std::uint32_t pp = 1; pp <= full; ++pp) {
        for (std::uint32_t q = 1; q <= full; ++q) {
          const std::uint32_t three = p | pp | q;
          // Q' must cover the singly-covered elements and stay inside P u P' u Q.
          const std::uint32_t required = (p & ~(pp | q)) | (pp & ~(p | q)) | (q & ~(p | pp));
          for (std::uint32_t qq = 1; qq <= full; ++qq) {
            if ((qq & required) != required || (qq & ~three)) continue;
            ++local[std::popcount(p) + std::popcount(pp) + std::popcount(q) + std::popcount(qq)];
          }
        }
      }
    }
#pragma omp critical(slln_covering_counts)
    for (std::size_t e = 0; e < counts.size(); ++e) counts[e] += local[e];
  }
  return counts;
}

double martingale_worst_average(const GeneratorEnsemble& ensemble, double t, std::size_t n,
                                const Matrix& x, int workers) {
  const auto atoms = static_cast<std::uint64_t>(ensemble.atom_count());
  struct Job {
    std::size_t k;
    std::uint64_t code;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 1; k <= n; ++k) {
    std::uint64_t prefixes = 1;
    for (std::size_t i = 1; i < k; ++i) prefixes *= atoms;
    for (std::uint64_t code = 0; code < prefixes; ++code) jobs.push_back({k, code});
  }
  double worst = 0.0;
  ErrorSlot errors;
#pragma omp parallel for num_threads(team_size(workers)) schedule(dynamic) reduction(max : worst)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(jobs.size()); ++j) {
    errors.run([&] {
      const Job job = jobs[j];
      std::vector<std::uint32_t> prefix(job.k - 1);
      std::uint64_t code = job.code;
      for (auto& w : prefix) {
        w = static_cast<std::uint32_t>(code % atoms);
        code /= atoms;
      }
      worst = std::max(worst,
                       martingale_property_check(ensemble, t, n, job.k, x, prefix).average_norm);
    });
  }
  errors.rethrow();
  return worst;
}

std::vector<TrialRecord> sweep(const PreparedSweep& sweep, int workers) {
  std::vector<TrialRecord> records(sweep.trials());
  ErrorSlot errors;
#pragma omp parallel for num_threads(team_size(workers)) schedule(dynamic, 4)
  for (std::int64_t trial = 0; trial < static_cast<std::int64_t>(sweep.trials()); ++trial) {
    errors.run([&] { records[trial] = sweep.measure(static_cast<std::size_t>(trial)); });
  }
  errors.rethrow();
  return records;
}

}  // namespace omp
}  // namespace slln::kernels
