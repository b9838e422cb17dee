// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace noisereg {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  [[nodiscard]] double half_width() const { return 0.5 * (hi - lo); }
  [[nodiscard]] bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Wilson score interval for k successes out of n (default 95%).
inline Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n = 0");
  if (k > n) throw std::invalid_argument("wilson_interval: k > n");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double spread = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // The bounds are exactly 0 at k = 0 and 1 at k = n; rounding would miss them.
  const double lo = k == 0 ? 0.0 : std::max(0.0, centre - spread);
  const double hi = k == n ? 1.0 : std::min(1.0, centre + spread);
  return {p, lo, hi};
}

/// P(first passage of mu t + W_t to level a > 0 happens by time t).
inline double inverse_gaussian_cdf(double level, double drift, double t) {
  if (!(level > 0.0)) throw std::invalid_argument("inverse_gaussian_cdf: level must be > 0");
  if (t <= 0.0) return 0.0;
  const double s = std::sqrt(t);
  const double first = normal_cdf((drift * t - level) / s);
  // exp(2 mu a) Phi(-(a + mu t)/sqrt t), evaluated in log space to avoid overflow.
  const double arg = -(level + drift * t) / s;
  const double tail = normal_cdf(arg);
  const double second = tail > 0.0 ? std::exp(2.0 * drift * level + std::log(tail)) : 0.0;
  return std::min(1.0, first + second);
}

/// P(sup_{s<=t} W_s >= a) = 2 (1 - Phi(a / sqrt t)).
inline double reflection_hit_probability(double level, double t) {
  if (t <= 0.0) return 0.0;
  return 2.0 * (1.0 - normal_cdf(std::abs(level) / std::sqrt(t)));
}

/// Linear-interpolation quantile (Hyndman-Fan type 7). Empty input gives NaN.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Unbiased sample standard deviation.
inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct LinearFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("least_squares: size mismatch");
  LinearFit fit;
  fit.n = x.size();
  if (fit.n < 2) return fit;
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace noisereg
