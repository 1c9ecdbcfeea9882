#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spdeftle {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for k successes out of n (z = 1.96 gives 95%).
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

/// Median of the values (average of the two middle ones for even counts).
double median(std::vector<double> values);

/// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Two-sided Kolmogorov-Smirnov distance between the sample and a continuous CDF.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace spdeftle
