#pragma once

#include <cstddef>
#include <vector>

namespace slln {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line y ~ intercept + slope x; weights default to 1.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& weights = {});

/// Linear-interpolated quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double q);
inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

}  // namespace slln
