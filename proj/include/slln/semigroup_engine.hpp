#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slln/linalg.hpp"
#include "slln/random_generators.hpp"

namespace slln {

/// Uniform grid t_j = j T / (m - 1) on [0, T]. T = 0 collapses to the single point {0}.
class TimeGrid {
 public:
  static constexpr std::size_t kDefaultPoints = 65;

  TimeGrid(double horizon, std::size_t points = kDefaultPoints);

  double horizon() const { return horizon_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  double horizon_;
  std::vector<double> values_;
};

inline constexpr double kExpmTolerance = 1e-13;

/// e^{A s} by scaling and squaring a Taylor polynomial whose truncation
/// remainder is bounded below tol * 2^{-squarings}.
Matrix expm(const Matrix& a, double s, double tol = kExpmTolerance);

/// m^k by binary powering.
Matrix matrix_power(const Matrix& m, std::uint64_t k);

/// e^{A_1 t/n} ... e^{A_n t/n}, index-ascending left to right.
Matrix product_composition(const SamplePath& path, const GeneratorEnsemble& ensemble, double t,
                           std::size_t n);

/// F(s) = E e^{A s} = sum_w p_w e^{A_w s}.
Matrix expected_semigroup(const GeneratorEnsemble& ensemble, double s);

/// F(t/n)^n, the expectation of the random composition under i.i.d. sampling.
Matrix chernoff_iterate(const GeneratorEnsemble& ensemble, double t, std::size_t n);

/// e^{E[A] t}.
Matrix limit_semigroup(const GeneratorEnsemble& ensemble, double t);

struct ChernoffConditionsReport {
  double identity_deviation = 0.0;       // ||F(0) - I||_max
  double worst_growth_ratio = 0.0;       // max_j ||F(t_j)|| / e^{rho t_j}
  bool growth_norm_certified = false;
  double derivative_error_coarse = 0.0;  // at h = 1e-4
  double derivative_error_fine = 0.0;    // at h = 1e-5
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

/// Numerical checks of the Chernoff conditions for F: F(0) = I,
/// ||F(t)|| <= e^{rho t} on the grid, and F'(0) = E[A] by central differences.
ChernoffConditionsReport chernoff_conditions_check(const GeneratorEnsemble& ensemble,
                                                   const TimeGrid& grid);

/// Cached factors e^{A_w s} for every atom at one step size s.
class FactorTable {
 public:
  FactorTable(const GeneratorEnsemble& ensemble, double s);

  double step() const { return step_; }
  const Matrix& factor(std::size_t atom) const { return factors_[atom]; }
  const Matrix& expected() const { return expected_; }

 private:
  double step_;
  std::vector<Matrix> factors_;
  Matrix expected_;
};

/// (e^{A_1 s} ... e^{A_n s}) x evaluated right to left.
Matrix apply_composition(const SamplePath& path, const FactorTable& table, std::size_t n,
                         const Matrix& x);

/// max_i || E e^{A_i s} - E e^{A s} || (spectral) for independent generators
/// whose laws may differ from `reference` while sharing its mean.
double mean_matched_exponential_gap(const GeneratorEnsemble& reference,
                                    const std::vector<GeneratorEnsemble>& laws, double s);

}  // namespace slln
