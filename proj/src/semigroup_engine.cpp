#include "slln/semigroup_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slln/errors.hpp"

namespace slln {

TimeGrid::TimeGrid(double horizon, std::size_t points) : horizon_(horizon) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InputError("time grid: T must be finite and >= 0");
  if (horizon == 0.0) {
    values_ = {0.0};
    return;
  }
  if (points < 2) throw InputError("time grid: at least two points required");
  values_.resize(points);
  for (std::size_t j = 0; j < points; ++j) {
    values_[j] = horizon * static_cast<double>(j) / static_cast<double>(points - 1);
  }
  values_.back() = horizon;
}

Matrix expm(const Matrix& a, double s, double tol) {
  if (a.rows() != a.cols()) throw InputError("expm: matrix must be square");
  if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("expm: s must be finite and >= 0");
  if (!a.allFinite()) throw InputError("expm: non-finite matrix entry");
  if (!(tol > 0.0)) throw InputError("expm: tolerance must be positive");

  const Matrix b = a * s;
  const double norm1 = b.size() == 0 ? 0.0 : b.cwiseAbs().colwise().sum().maxCoeff();

  // Scale so that theta = ||B||_1 / 2^j <= 1/2.
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const double theta = std::ldexp(norm1, -squarings);
  const Matrix x = b * std::ldexp(1.0, -squarings);

  // Degree K: theta^{K+1}/(K+1)! / (1 - theta/(K+2)) below the per-step budget.
  const double budget = std::ldexp(std::min(tol, 1e-16), -squarings) * 1e-3;
  int degree = 1;
  double term = theta;  // theta^degree / degree!
  while (degree < 40) {
    const double next = term * theta / (degree + 1);
    if (next / (1.0 - theta / (degree + 2)) <= budget) break;
    term = next;
    ++degree;
  }

  const auto dim = a.rows();
  Matrix p = identity(dim);
  for (int k = degree; k >= 1; --k) {
    p = identity(dim) + (x * p) / static_cast<double>(k);
  }
  for (int i = 0; i < squarings; ++i) p = p * p;
  return p;
}

Matrix matrix_power(const Matrix& m, std::uint64_t k) {
  if (m.rows() != m.cols()) throw InputError("matrix_power: matrix must be square");
  Matrix result = identity(m.rows());
  Matrix base = m;
  bool first = true;
  while (k > 0) {
    if (k & 1U) {
      result = first ? base : Matrix(result * base);
      first = false;
    }
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return result;
}

Matrix product_composition(const SamplePath& path, const GeneratorEnsemble& ensemble, double t,
                           std::size_t n) {
  if (!(t >= 0.0)) throw InputError("product_composition: t must be >= 0");
  if (n < 1 || path.n() < n) throw InputError("product_composition: path shorter than n");
  const FactorTable table(ensemble, t / static_cast<double>(n));
  Matrix product = table.factor(path.indices[0]);
  for (std::size_t i = 1; i < n; ++i) product = product * table.factor(path.indices[i]);
  return product;
}

Matrix expected_semigroup(const GeneratorEnsemble& ensemble, double s) {
  Matrix f = Matrix::Zero(ensemble.dim(), ensemble.dim());
  const auto& probs = ensemble.dist().probs();
  for (std::size_t w = 0; w < ensemble.atom_count(); ++w) {
    f += probs[w] * expm(ensemble.atom(w), s);
  }
  return f;
}

Matrix chernoff_iterate(const GeneratorEnsemble& ensemble, double t, std::size_t n) {
  if (n < 1) throw InputError("chernoff_iterate: n must be >= 1");
  if (!(t >= 0.0)) throw InputError("chernoff_iterate: t must be >= 0");
  return matrix_power(expected_semigroup(ensemble, t / static_cast<double>(n)), n);
}

Matrix limit_semigroup(const GeneratorEnsemble& ensemble, double t) {
  if (!(t >= 0.0)) throw InputError("limit_semigroup: t must be >= 0");
  return expm(ensemble.mean(), t);
}

namespace {

// (F(h) - F(-h)) / 2h with F(-h) = sum_w p_w e^{(-A_w) h}.
Matrix central_difference(const GeneratorEnsemble& ensemble, double h) {
  Matrix diff = Matrix::Zero(ensemble.dim(), ensemble.dim());
  const auto& probs = ensemble.dist().probs();
  for (std::size_t w = 0; w < ensemble.atom_count(); ++w) {
    diff += probs[w] * (expm(ensemble.atom(w), h) - expm(-ensemble.atom(w), h));
  }
  return diff / (2.0 * h);
}

}  // namespace

ChernoffConditionsReport chernoff_conditions_check(const GeneratorEnsemble& ensemble,
                                                   const TimeGrid& grid) {
  ChernoffConditionsReport report;
  const Matrix f0 = expected_semigroup(ensemble, 0.0);
  report.identity_deviation = max_abs(f0 - identity(ensemble.dim()));
  if (report.identity_deviation > 1e-13) report.failures.push_back("(b) F(0) != I");

  report.growth_norm_certified = ensemble.model().has_exact_operator_norm();
  for (double t : grid.values()) {
    const double norm = best_operator_norm(ensemble.model(), expected_semigroup(ensemble, t)).value;
    const double ratio = norm / std::exp(ensemble.rho() * t);
    report.worst_growth_ratio = std::max(report.worst_growth_ratio, ratio);
    if (ratio > 1.0 + 1e-8) {
      std::ostringstream os;
      os << "(c) ||F(" << t << ")|| = " << norm << " exceeds e^{rho t}";
      report.failures.push_back(os.str());
    }
  }

  constexpr double kCoarse = 1e-4;
  constexpr double kFine = 1e-5;
  report.derivative_error_coarse = max_abs(central_difference(ensemble, kCoarse) - ensemble.mean());
  report.derivative_error_fine = max_abs(central_difference(ensemble, kFine) - ensemble.mean());
  if (report.derivative_error_fine > 1e-7) {
    report.failures.push_back("(d) F'(0) differs from E[A] at h = 1e-5");
  }
  // Central differences lose h^2 per refinement until round-off (~eps/h) takes over.
  const double expected_fine =
      report.derivative_error_coarse * (kFine / kCoarse) * (kFine / kCoarse) * 4.0;
  if (report.derivative_error_fine > std::max(expected_fine, 1e-9)) {
    report.failures.push_back("(d) finite-difference error does not decay under refinement");
  }
  return report;
}

FactorTable::FactorTable(const GeneratorEnsemble& ensemble, double s)
    : step_(s), expected_(Matrix::Zero(ensemble.dim(), ensemble.dim())) {
  factors_.reserve(ensemble.atom_count());
  const auto& probs = ensemble.dist().probs();
  for (std::size_t w = 0; w < ensemble.atom_count(); ++w) {
    factors_.push_back(expm(ensemble.atom(w), s));
    expected_ += probs[w] * factors_.back();
  }
}

Matrix apply_composition(const SamplePath& path, const FactorTable& table, std::size_t n,
                         const Matrix& x) {
  if (path.n() < n) throw InputError("apply_composition: path shorter than n");
  Matrix y = x;
  for (std::size_t i = n; i-- > 0;) y = table.factor(path.indices[i]) * y;
  return y;
}

double mean_matched_exponential_gap(const GeneratorEnsemble& reference,
                                    const std::vector<GeneratorEnsemble>& laws, double s) {
  const Matrix f_ref = expected_semigroup(reference, s);
  double gap = 0.0;
  for (const auto& law : laws) {
    if (law.dim() != reference.dim()) throw InputError("mean_matched_exponential_gap: dim mismatch");
    if (max_abs(law.mean() - reference.mean()) > tol::kExact * std::max(1.0, max_abs(reference.mean()))) {
      throw InputError("mean_matched_exponential_gap: laws must share the reference mean");
    }
    gap = std::max(gap, spectral_norm(expected_semigroup(law, s) - f_ref));
  }
  return gap;
}

}  // namespace slln
