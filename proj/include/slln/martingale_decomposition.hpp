#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slln/linalg.hpp"
#include "slln/random_generators.hpp"
#include "slln/semigroup_engine.hpp"

namespace slln {

/// Largest n for which all 2^n index sets are enumerated.
inline constexpr std::size_t kMaxEnumeratedN = 14;

/// An index set P within [n] = {1, ..., n}, stored sorted.
class SubsetIndex {
 public:
  SubsetIndex(std::size_t n, std::vector<std::size_t> members);
  /// Bit i-1 of `mask` selects index i.
  static SubsetIndex from_mask(std::size_t n, std::uint64_t mask);

  std::size_t n() const { return n_; }
  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  /// max P, or 0 for the empty set.
  std::size_t max() const { return members_.empty() ? 0 : members_.back(); }
  std::uint64_t mask() const;

 private:
  std::size_t n_;
  std::vector<std::size_t> members_;
};

struct DecompositionTerm {
  SubsetIndex subset;
  Matrix value;
};

/// Everything the F_{n,P}(s) terms of one path share: F(s), its powers,
/// the sampled factors e^{A_i s} and the centered factors Delta_i(s).
class DecompositionContext {
 public:
  DecompositionContext(const SamplePath& path, const GeneratorEnsemble& ensemble, std::size_t n,
                       double s);

  std::size_t n() const { return n_; }
  double step() const { return step_; }
  const Matrix& expected() const { return power_[1]; }
  const Matrix& expected_power(std::size_t k) const { return power_.at(k); }
  const Matrix& factor(std::size_t i) const { return factor_.at(i - 1); }
  const Matrix& delta(std::size_t i) const { return delta_.at(i - 1); }

  /// F(s)^{i_1-1} Delta_{i_1}(s) F(s)^{i_2-i_1-1} ... Delta_{i_k}(s) F(s)^{n-i_k}.
  Matrix term(std::uint64_t mask) const;
  /// term(mask) * x, evaluated right to left without forming the matrix.
  Matrix apply_term(std::uint64_t mask, const Matrix& x) const;
  /// e^{A_1 s} ... e^{A_n s}.
  Matrix product() const;

 private:
  std::size_t n_;
  double step_;
  std::vector<Matrix> power_;
  std::vector<Matrix> factor_;
  std::vector<Matrix> delta_;
};

/// Delta_i(s) = e^{A_i s} - E e^{A s}.
Matrix delta(const SamplePath& path, const GeneratorEnsemble& ensemble, std::size_t i, double s);

/// F_{n,P}(s) with n = subset.n().
DecompositionTerm term_F(const SamplePath& path, const GeneratorEnsemble& ensemble,
                         const SubsetIndex& subset, double s);

struct ExpansionReport {
  std::size_t n = 0;
  double max_deviation = 0.0;          // sum_P F_{n,P}(s) vs the product, entrywise
  double empty_term_deviation = 0.0;   // F_{n,{}}(s) vs chernoff_iterate
  double scale = 1.0;
  bool passed() const { return max_deviation <= 1e-10 * scale && empty_term_deviation <= 1e-10 * scale; }
};

/// Enumerates all subsets of [n] and checks sum_P F_{n,P}(s) = e^{A_1 s} ... e^{A_n s}.
ExpansionReport expansion_identity_check(const SamplePath& path, const GeneratorEnsemble& ensemble,
                                         double s, std::size_t n);

/// mu_n(t) = (e^{A_1 t/n} ... e^{A_n t/n} - F(t/n)^n) x.
Matrix mu(const SamplePath& path, const GeneratorEnsemble& ensemble, double t, std::size_t n,
          const Matrix& x);

/// d_{n,k}(t) = sum over P with max P = k of F_{n,P}(t/n) x, by enumeration (n <= 14).
Matrix increment_d(const SamplePath& path, const GeneratorEnsemble& ensemble, double t,
                   std::size_t n, std::size_t k, const Matrix& x);

/// d_{n,k}(t) through the collapsed prefix sum:
/// e^{A_1 t/n} ... e^{A_{k-1} t/n} Delta_k(t/n) F(t/n)^{n-k} x. No size cap.
Matrix increment_d_telescoped(const DecompositionContext& ctx, std::size_t k, const Matrix& x);

/// All of d_{n,1}(t), ..., d_{n,n}(t) via the telescoped form.
std::vector<Matrix> all_increments(const DecompositionContext& ctx, const Matrix& x);

struct MartingaleReport {
  double average_norm = 0.0;  // || E[d_{n,k} | A_1..A_{k-1}] ||
  double tolerance = 1e-11;
  bool passed() const { return average_norm <= tolerance; }
};

/// Holds A_1..A_{k-1} at `prefix` and averages d_{n,k}(t) over the law of A_k.
MartingaleReport martingale_property_check(const GeneratorEnsemble& ensemble, double t,
                                           std::size_t n, std::size_t k, const Matrix& x,
                                           const std::vector<std::uint32_t>& prefix);

/// (2 rho s)^k e^{n rho s}.
double bound_est_norm(std::size_t n, std::size_t k, double s, double rho);

struct IncrementBound {
  double binomial_sum = 0.0;  // sum_j C(k-1, j-1) (2 rho t/n)^j e^{rho t} ||x||
  double intermediate = 0.0;  // (2 rho t/n) e^{rho t} (1 + 2 rho t/n)^{k-1} ||x||
  double final = 0.0;         // (2 rho t/n) e^{3 rho t} ||x||
};

IncrementBound bound_increment(std::size_t n, std::size_t k, double t, double rho, double x_norm);

struct BoundViolation {
  std::string bound;
  std::size_t trial = 0;
  double value = 0.0;
  double limit = 0.0;
};

struct BoundSuiteReport {
  std::size_t trials = 0;
  std::size_t checks = 0;
  bool certified = false;
  std::vector<BoundViolation> violations;
  bool passed() const { return violations.empty(); }
};

inline constexpr double kBoundSlack = 1.0 + 1e-8;

/// Random paths (n <= 10), step sizes and elements; checks every explicit
/// norm bound of the decomposition. Uses certified norms where the model
/// has them, sound lower bounds otherwise.
BoundSuiteReport run_bound_suite(const GeneratorEnsemble& ensemble, std::size_t trials,
                                 std::uint64_t seed);

}  // namespace slln
