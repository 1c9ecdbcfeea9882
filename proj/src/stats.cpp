#include "spdeftle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spdeftle {

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  if (k > n) throw std::invalid_argument("wilson_interval: k > n");
  const double nn = double(n);
  const double p = double(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // the formula leaves rounding residue at the exact endpoints k = 0 and k = n
  return {k == 0 ? 0.0 : std::clamp(center - half, 0.0, 1.0), k == n ? 1.0 : std::clamp(center + half, 0.0, 1.0)};
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + std::ptrdiff_t(mid));
  return 0.5 * (lo + hi);
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope: need >= 2 paired points");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ls_slope: degenerate abscissae");
  return sxy / sxx;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) lx[i] = std::log(x[i]);
  for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
  return ls_slope(lx, ly);
}

double ks_distance(std::vector<double> s, const std::function<double(double)>& cdf) {
  if (s.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(s.begin(), s.end());
  const double n = double(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double f = cdf(s[i]);
    d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
  }
  return d;
}

}  // namespace spdeftle
