#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "noisereg/statistics.hpp"

using namespace noisereg;

TEST(Wilson, ZeroSuccesses) {
  const auto ci = wilson_interval(0, 10);
  const double z2 = 1.959963984540054 * 1.959963984540054;
  EXPECT_EQ(ci.estimate, 0.0);
  EXPECT_EQ(ci.lo, 0.0);
  EXPECT_NEAR(ci.hi, z2 / (10.0 + z2), 1e-12);
}

TEST(Wilson, ContainsEstimateProperty) {
  for (std::size_t n : {1u, 7u, 100u, 2000u}) {
    for (std::size_t k = 0; k <= n; k += std::max<std::size_t>(1, n / 13)) {
      const auto ci = wilson_interval(k, n);
      EXPECT_TRUE(ci.contains(ci.estimate));
      EXPECT_GE(ci.lo, 0.0);
      EXPECT_LE(ci.hi, 1.0);
    }
  }
  EXPECT_THROW(wilson_interval(3, 2), std::invalid_argument);
}

TEST(InverseGaussian, MatchesIntegratedDensity) {
  // First-passage density a / sqrt(2 pi s^3) exp(-(a - mu s)^2 / (2 s)), midpoint rule.
  const double a = std::numbers::pi / 2, mu = 1.0;
  for (double t : {0.5, 2.0, 10.0}) {
    const int n = 400000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = (i + 0.5) * t / n;
      s += a / std::sqrt(2 * std::numbers::pi * u * u * u) * std::exp(-(a - mu * u) * (a - mu * u) / (2 * u));
    }
    EXPECT_NEAR(inverse_gaussian_cdf(a, mu, t), s * t / n, 1e-6);
  }
}

TEST(InverseGaussian, DriftlessIsReflection) {
  for (double t : {0.1, 1.0, 5.0}) {
    EXPECT_NEAR(inverse_gaussian_cdf(0.5, 0.0, t), reflection_hit_probability(0.5, t), 1e-14);
  }
  EXPECT_NEAR(reflection_hit_probability(0.5, 5.0), 0.8230632737, 1e-9);
}

TEST(Quantile, Type7) {
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25), 2.0);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
}

TEST(LeastSquares, ExactLine) {
  const auto fit = least_squares({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  EXPECT_DOUBLE_EQ(fit.slope, 2.0);
  EXPECT_DOUBLE_EQ(fit.intercept, 1.0);
}

TEST(Moments, MeanAndStddev) {
  EXPECT_DOUBLE_EQ(mean({1.0, 2.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(stddev({1.0, 2.0, 3.0}), 1.0);
}
