#pragma once

// Fourth-moment combinatorics of the seminorm tail bound: the weighted count
// of covering 4-tuples (P, P', Q, Q') of nonempty subsets of [n], where every
// element of every set also lies in one of the other three.

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace slln {

using Rational = boost::multiprecision::cpp_rational;

/// Exact rational value of a finite double.
Rational to_rational(double value);

/// Largest n accepted by the brute-force enumeration ((2^n - 1)^4 tuples).
inline constexpr unsigned kMaxBruteForceN = 8;

namespace detail {
template <class S>
S power(const S& base, unsigned n) {
  S out(1);
  for (unsigned i = 0; i < n; ++i) out *= base;
  return out;
}
}  // namespace detail

/// Inclusion-exclusion closed form
///   C(4,0) S_4^n - C(4,1) S_3^n + C(4,2) S_2^n - C(4,3) S_1^n + C(4,4) S_0^n
/// with S_4 = 1 + 6u^2 + 4u^3 + u^4, S_3 = 1 + 3u^2 + u^3, S_2 = 1 + u^2, S_1 = S_0 = 1.
template <class S>
S fourth_moment_formula(unsigned n, const S& u) {
  const S u2 = u * u;
  const S u3 = u2 * u;
  const S u4 = u3 * u;
  const S s4 = S(1) + S(6) * u2 + S(4) * u3 + u4;
  const S s3 = S(1) + S(3) * u2 + u3;
  const S s2 = S(1) + u2;
  return detail::power(s4, n) - S(4) * detail::power(s3, n) + S(6) * detail::power(s2, n) -
         S(4) + S(1);
}

/// The closed form at u = num / den, evaluated in exact integer arithmetic
/// (scaled by den^{4n}) and rounded once. Suitable for large n.
double fourth_moment_formula_exact(unsigned n, const boost::multiprecision::cpp_int& num,
                                   const boost::multiprecision::cpp_int& den);

/// counts[e] = number of covering tuples with |P| + |P'| + |Q| + |Q'| = e.
/// Dispatches to the OpenMP kernel; CapabilityError for n > 8.
std::vector<std::uint64_t> covering_tuple_counts(unsigned n);

/// sum over covering tuples of u^{|P|+|P'|+|Q|+|Q'|}, by enumeration.
template <class S>
S fourth_moment_bruteforce(unsigned n, const S& u) {
  const auto counts = covering_tuple_counts(n);
  S total(0);
  S power(1);
  for (std::size_t e = 0; e < counts.size(); ++e) {
    if (counts[e] != 0) total += S(counts[e]) * power;
    power *= u;
  }
  return total;
}

struct TailCoefficientProbe {
  double rho_t = 0.0;
  std::vector<double> n_values;
  std::vector<double> values;          // formula at u = 2 rho t / n
  double fitted_coefficient = 0.0;     // least-squares c in value ~ c / n^2
  double residual = 0.0;               // rms of n^2 value - c
  double fitted_exponent = 0.0;        // free slope of log value vs log n
  double stated_constant = 0.0;        // 12 rho^2 t^2, the coefficient stated for the tail bound
  double expansion_constant = 0.0;     // 48 rho^4 t^4, leading term of the S-sum
  bool matches_stated_constant = false;     // within 10%
  bool matches_expansion_constant = false;  // within 10%
};

/// Evaluates the closed form (exactly, then rounded) along u = 2 rho t / n
/// and fits the n^{-2} coefficient.
TailCoefficientProbe tail_coefficient_probe(double rho, double t, const std::vector<double>& n_values);

}  // namespace slln
