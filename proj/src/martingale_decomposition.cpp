#include "slln/martingale_decomposition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "slln/errors.hpp"
#include "slln/kernels.hpp"

namespace slln {

SubsetIndex::SubsetIndex(std::size_t n, std::vector<std::size_t> members)
    : n_(n), members_(std::move(members)) {
  for (std::size_t j = 0; j < members_.size(); ++j) {
    if (members_[j] < 1 || members_[j] > n_) throw InputError("subset index: member outside [1, n]");
    if (j > 0 && members_[j] <= members_[j - 1]) {
      throw InputError("subset index: members must be strictly increasing");
    }
  }
}

SubsetIndex SubsetIndex::from_mask(std::size_t n, std::uint64_t mask) {
  if (n > 63) throw InputError("subset index: masks support n <= 63");
  if (n < 64 && (mask >> n) != 0) throw InputError("subset index: mask has bits beyond n");
  std::vector<std::size_t> members;
  for (std::size_t i = 1; i <= n; ++i) {
    if (mask & (std::uint64_t{1} << (i - 1))) members.push_back(i);
  }
  return SubsetIndex(n, std::move(members));
}

std::uint64_t SubsetIndex::mask() const {
  if (n_ > 63) throw InputError("subset index: masks support n <= 63");
  std::uint64_t m = 0;
  for (auto i : members_) m |= std::uint64_t{1} << (i - 1);
  return m;
}

DecompositionContext::DecompositionContext(const SamplePath& path, const GeneratorEnsemble& ensemble,
                                           std::size_t n, double s)
    : n_(n), step_(s) {
  if (n < 1 || n > 63) throw InputError("decomposition: need 1 <= n <= 63");
  if (path.n() < n) throw InputError("decomposition: path shorter than n");
  if (!(s >= 0.0)) throw InputError("decomposition: s must be >= 0");
  const FactorTable table(ensemble, s);
  power_.reserve(n + 1);
  power_.push_back(identity(ensemble.dim()));
  for (std::size_t k = 1; k <= n; ++k) power_.push_back(power_.back() * table.expected());
  for (std::size_t i = 0; i < n; ++i) {
    factor_.push_back(table.factor(path.indices[i]));
    delta_.push_back(factor_.back() - table.expected());
  }
}

Matrix DecompositionContext::term(std::uint64_t mask) const {
  Matrix out = identity(power_[0].rows());
  std::size_t run = 0;  // pending F factors
  for (std::size_t i = 1; i <= n_; ++i) {
    if (mask & (std::uint64_t{1} << (i - 1))) {
      if (run > 0) out = out * power_[run];
      out = out * delta_[i - 1];
      run = 0;
    } else {
      ++run;
    }
  }
  if (run > 0) out = out * power_[run];
  return out;
}

Matrix DecompositionContext::apply_term(std::uint64_t mask, const Matrix& x) const {
  Matrix y = x;
  std::size_t run = 0;
  for (std::size_t i = n_; i >= 1; --i) {
    if (mask & (std::uint64_t{1} << (i - 1))) {
      if (run > 0) y = power_[run] * y;
      y = delta_[i - 1] * y;
      run = 0;
    } else {
      ++run;
    }
  }
  if (run > 0) y = power_[run] * y;
  return y;
}

Matrix DecompositionContext::product() const {
  Matrix out = factor_.front();
  for (std::size_t i = 1; i < n_; ++i) out = out * factor_[i];
  return out;
}

Matrix delta(const SamplePath& path, const GeneratorEnsemble& ensemble, std::size_t i, double s) {
  if (i < 1 || i > path.n()) throw InputError("delta: index outside [1, path length]");
  return expm(path.generator(ensemble, i), s) - expected_semigroup(ensemble, s);
}

DecompositionTerm term_F(const SamplePath& path, const GeneratorEnsemble& ensemble,
                         const SubsetIndex& subset, double s) {
  if (subset.n() != path.n()) throw InputError("term_F: subset ambient size must equal path length");
  const DecompositionContext ctx(path, ensemble, subset.n(), s);
  return {subset, ctx.term(subset.mask())};
}

ExpansionReport expansion_identity_check(const SamplePath& path, const GeneratorEnsemble& ensemble,
                                         double s, std::size_t n) {
  if (n < 1 || n > kMaxEnumeratedN) throw CapabilityError("expansion_identity_check: n must lie in [1, 14]");
  const DecompositionContext ctx(path, ensemble, n, s);
  const Matrix product = ctx.product();
  const Matrix sum = kernels::omp::expansion_sum(ctx);

  ExpansionReport report;
  report.n = n;
  report.scale = std::max(1.0, max_abs(product));
  report.max_deviation = max_abs(sum - product);
  report.empty_term_deviation =
      max_abs(ctx.term(0) - chernoff_iterate(ensemble, s * static_cast<double>(n), n));
  return report;
}

Matrix mu(const SamplePath& path, const GeneratorEnsemble& ensemble, double t, std::size_t n,
          const Matrix& x) {
  return (product_composition(path, ensemble, t, n) - chernoff_iterate(ensemble, t, n)) * x;
}

Matrix increment_d(const SamplePath& path, const GeneratorEnsemble& ensemble, double t,
                   std::size_t n, std::size_t k, const Matrix& x) {
  if (n < 1 || n > kMaxEnumeratedN) throw CapabilityError("increment_d: exact mode needs n <= 14");
  if (k < 1 || k > n) throw InputError("increment_d: need 1 <= k <= n");
  const DecompositionContext ctx(path, ensemble, n, t / static_cast<double>(n));
  const std::uint64_t top = std::uint64_t{1} << (k - 1);
  Matrix sum = Matrix::Zero(x.rows(), x.cols());
  for (std::uint64_t lower = 0; lower < top; ++lower) sum += ctx.apply_term(top | lower, x);
  return sum;
}

Matrix increment_d_telescoped(const DecompositionContext& ctx, std::size_t k, const Matrix& x) {
  if (k < 1 || k > ctx.n()) throw InputError("increment_d_telescoped: need 1 <= k <= n");
  Matrix y = ctx.delta(k) * (ctx.expected_power(ctx.n() - k) * x);
  for (std::size_t i = k - 1; i >= 1; --i) y = ctx.factor(i) * y;
  return y;
}

std::vector<Matrix> all_increments(const DecompositionContext& ctx, const Matrix& x) {
  const std::size_t n = ctx.n();
  std::vector<Matrix> d(n);
  // tail_k = F^{n-k} x, built from k = n downwards.
  Matrix tail = x;
  for (std::size_t k = n; k >= 1; --k) {
    Matrix y = ctx.delta(k) * tail;
    for (std::size_t i = k - 1; i >= 1; --i) y = ctx.factor(i) * y;
    d[k - 1] = std::move(y);
    tail = ctx.expected() * tail;
  }
  return d;
}

MartingaleReport martingale_property_check(const GeneratorEnsemble& ensemble, double t,
                                           std::size_t n, std::size_t k, const Matrix& x,
                                           const std::vector<std::uint32_t>& prefix) {
  if (k < 1 || k > n) throw InputError("martingale_property_check: need 1 <= k <= n");
  if (prefix.size() != k - 1) throw InputError("martingale_property_check: prefix must hold k-1 atoms");
  std::vector<std::uint32_t> indices(prefix);
  indices.resize(n, 0);  // d_{n,k} does not depend on A_{k+1}, ..., A_n
  const auto& probs = ensemble.dist().probs();
  Matrix average = Matrix::Zero(x.rows(), x.cols());
  for (std::uint32_t w = 0; w < ensemble.atom_count(); ++w) {
    indices[k - 1] = w;
    const SamplePath path = path_from_indices(ensemble, indices);
    average += probs[w] * increment_d(path, ensemble, t, n, k, x);
  }
  return {vector_norm(ensemble.model(), average)};
}

double bound_est_norm(std::size_t n, std::size_t k, double s, double rho) {
  if (k > n) throw InputError("bound_est_norm: need k <= n");
  if (!(s >= 0.0) || !(rho > 0.0)) throw InputError("bound_est_norm: need s >= 0, rho > 0");
  return std::pow(2.0 * rho * s, static_cast<double>(k)) *
         std::exp(static_cast<double>(n) * rho * s);
}

IncrementBound bound_increment(std::size_t n, std::size_t k, double t, double rho, double x_norm) {
  if (n < 1 || k < 1 || k > n) throw InputError("bound_increment: need 1 <= k <= n");
  if (!(t >= 0.0) || !(rho > 0.0)) throw InputError("bound_increment: need t >= 0, rho > 0");
  const double z = 2.0 * rho * t / static_cast<double>(n);
  const double grow = std::exp(rho * t);
  IncrementBound b;
  double binom = 1.0;  // C(k-1, j-1)
  for (std::size_t j = 1; j <= k; ++j) {
    b.binomial_sum += binom * std::pow(z, static_cast<double>(j)) * grow;
    binom = binom * static_cast<double>(k - j) / static_cast<double>(j);
  }
  b.binomial_sum *= x_norm;
  b.intermediate = z * grow * std::pow(1.0 + z, static_cast<double>(k - 1)) * x_norm;
  b.final = z * std::exp(3.0 * rho * t) * x_norm;
  return b;
}

BoundSuiteReport run_bound_suite(const GeneratorEnsemble& ensemble, std::size_t trials,
                                 std::uint64_t seed) {
  const SpaceModel& model = ensemble.model();
  const double rho = ensemble.rho();
  BoundSuiteReport report;
  report.trials = trials;
  report.certified = model.has_exact_operator_norm();

  auto op_norm = [&](const Matrix& a) { return best_operator_norm(model, a).value; };
  auto check = [&](const char* name, std::size_t trial, double value, double limit) {
    ++report.checks;
    if (value > limit * kBoundSlack) report.violations.push_back({name, trial, value, limit});
  };

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_n(1, 10);
  std::uniform_real_distribution<double> pick_s(0.0, 1.0);
  constexpr std::size_t kSubsetSamples = 64;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t n = pick_n(rng);
    const double s = 1.0 - pick_s(rng);  // (0, 1]
    const double t = s * static_cast<double>(n);
    const SamplePath path = sample_iid(ensemble, n, derive_seed(seed, trial));
    const DecompositionContext ctx(path, ensemble, n, s);
    const Matrix x = random_coords(model, rng);
    const double x_norm = vector_norm(model, x);
    const double grow = std::exp(rho * s);

    check("||E e^{As}|| <= e^{rho s}", trial, op_norm(ctx.expected()), grow);
    for (std::size_t i = 1; i <= n; ++i) {
      check("||e^{As} - I|| <= rho s e^{rho s}", trial,
            op_norm(ctx.factor(i) - identity(ensemble.dim())), rho * s * grow);
      check("||Delta_i(s)|| <= 2 rho s e^{rho s}", trial, op_norm(ctx.delta(i)),
            2.0 * rho * s * grow);
    }

    std::vector<std::uint64_t> masks;
    const std::uint64_t all = (std::uint64_t{1} << n) - 1;
    if (n <= 6) {
      for (std::uint64_t m = 0; m <= all; ++m) masks.push_back(m);
    } else {
      std::uniform_int_distribution<std::uint64_t> pick_mask(0, all);
      masks = {0, all};
      for (std::size_t j = 0; j < kSubsetSamples; ++j) masks.push_back(pick_mask(rng));
    }
    for (auto m : masks) {
      const auto k = static_cast<std::size_t>(std::popcount(m));
      check("||F_{n,P}(s)|| <= (2 rho s)^k e^{n rho s}", trial, op_norm(ctx.term(m)),
            bound_est_norm(n, k, s, rho));
    }

    const auto d = all_increments(ctx, x);
    for (std::size_t k = 1; k <= n; ++k) {
      check("||d_{n,k}(t)|| <= (2 rho t/n) e^{3 rho t} ||x||", trial, vector_norm(model, d[k - 1]),
            bound_increment(n, k, t, rho, x_norm).final);
    }
  }
  return report;
}

}  // namespace slln
