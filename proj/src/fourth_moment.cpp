#include "slln/fourth_moment.hpp"

#include <cmath>

#include "slln/errors.hpp"
#include "slln/kernels.hpp"
#include "slln/stats.hpp"

namespace slln {

Rational to_rational(double value) {
  if (!std::isfinite(value)) throw InputError("to_rational: value must be finite");
  int exponent = 0;
  const double mantissa = std::frexp(value, &exponent);
  // mantissa * 2^53 is an exact integer.
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(scaled);
  const boost::multiprecision::cpp_int two_pow = boost::multiprecision::cpp_int(1) << std::abs(exponent);
  return exponent >= 0 ? Rational(r * Rational(two_pow)) : Rational(r / Rational(two_pow));
}

namespace {

using boost::multiprecision::cpp_int;

double ratio_to_double(const cpp_int& num, const cpp_int& den) {
  if (num == 0) return 0.0;
  const bool negative = num < 0;
  const cpp_int a = negative ? cpp_int(-num) : num;
  const long shift = static_cast<long>(boost::multiprecision::msb(a)) -
                     static_cast<long>(boost::multiprecision::msb(den));
  // Quotient with ~62 significant bits, then rescale.
  const long lift = 62 - shift;
  const cpp_int q = lift >= 0 ? cpp_int((a << lift) / den) : cpp_int(a / (den << -lift));
  const double value = std::ldexp(static_cast<double>(q), static_cast<int>(-lift));
  return negative ? -value : value;
}

}  // namespace

double fourth_moment_formula_exact(unsigned n, const cpp_int& num, const cpp_int& den) {
  if (den <= 0 || num < 0) throw InputError("fourth_moment_formula_exact: need num >= 0, den > 0");
  using boost::multiprecision::pow;
  const cpp_int a = num;
  const cpp_int b = den;
  const cpp_int n4 = pow(b, 4) + 6 * a * a * b * b + 4 * a * a * a * b + pow(a, 4);
  const cpp_int n3 = pow(b, 3) + 3 * a * a * b + pow(a, 3);
  const cpp_int n2 = b * b + a * a;
  const cpp_int scaled = pow(n4, n) - 4 * pow(n3, n) * pow(b, n) + 6 * pow(n2, n) * pow(b, 2 * n) -
                         3 * pow(b, 4 * n);
  return ratio_to_double(scaled, pow(b, 4 * n));
}

std::vector<std::uint64_t> covering_tuple_counts(unsigned n) {
  if (n < 1 || n > kMaxBruteForceN) {
    throw CapabilityError("covering tuple enumeration supports 1 <= n <= 8");
  }
  return kernels::omp::covering_tuple_counts(n);
}

TailCoefficientProbe tail_coefficient_probe(double rho, double t, const std::vector<double>& n_values) {
  if (n_values.size() < 2) throw InputError("tail_coefficient_probe: need at least two n values");
  TailCoefficientProbe probe;
  probe.rho_t = rho * t;
  probe.n_values = n_values;

  std::vector<double> scaled;
  for (double n : n_values) {
    if (!(n >= 1.0) || n != std::floor(n)) throw InputError("tail_coefficient_probe: n must be a positive integer");
    // Exact evaluation: the alternating sum cancels to O(u^4).
    const Rational u = to_rational(2.0 * rho * t) / Rational(static_cast<long long>(n));
    const double value = fourth_moment_formula_exact(static_cast<unsigned>(n),
                                                     boost::multiprecision::numerator(u),
                                                     boost::multiprecision::denominator(u));
    probe.values.push_back(value);
    scaled.push_back(value * n * n);
  }

  double sum = 0.0;
  for (double v : scaled) sum += v;
  probe.fitted_coefficient = sum / static_cast<double>(scaled.size());
  double sq = 0.0;
  for (double v : scaled) sq += (v - probe.fitted_coefficient) * (v - probe.fitted_coefficient);
  probe.residual = std::sqrt(sq / static_cast<double>(scaled.size()));

  std::vector<double> log_n;
  std::vector<double> log_v;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (probe.values[i] > 0.0) {
      log_n.push_back(std::log(n_values[i]));
      log_v.push_back(std::log(probe.values[i]));
    }
  }
  if (log_n.size() >= 2) probe.fitted_exponent = fit_line(log_n, log_v).slope;

  const double x = probe.rho_t;
  probe.stated_constant = 12.0 * x * x;
  probe.expansion_constant = 48.0 * x * x * x * x;
  auto close = [&](double ref) {
    return ref > 0.0 && std::abs(probe.fitted_coefficient - ref) <= 0.1 * ref;
  };
  probe.matches_stated_constant = close(probe.stated_constant);
  probe.matches_expansion_constant = close(probe.expansion_constant);
  return probe;
}

}  // namespace slln
