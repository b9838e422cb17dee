#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "noisereg/quadrature.hpp"

using namespace noisereg;

TEST(Integrate, Polynomial) {
  const auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-14);
}

TEST(Integrate, FromOriginLongRange) {
  const double v = integrate_from_origin([](double x) { return 1.0 / (1.0 + x * x); }, -4e6);
  EXPECT_NEAR(v, std::atan(-4e6), 1e-9);
}

TEST(Improper, ArctanTail) {
  const auto r = improper_integral([](double z) { return 1.0 / (1.0 + z * z); }, 0.0);
  ASSERT_TRUE(r.finite());
  EXPECT_NEAR(r.value, std::numbers::pi / 2, 1e-8);
}

TEST(Improper, Exponential) {
  const auto r = improper_integral([](double z) { return std::exp(-z); }, 0.0);
  ASSERT_TRUE(r.finite());
  EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(Improper, PowerTailThreeHalves) {
  const auto r = improper_integral([](double z) { return std::pow(1.0 + z, -1.5); }, 0.0);
  ASSERT_TRUE(r.finite());
  EXPECT_NEAR(r.value, 2.0, 1e-6);
}

TEST(Improper, HarmonicDiverges) {
  EXPECT_EQ(improper_integral([](double z) { return 1.0 / (1.0 + z); }, 0.0).verdict, Verdict::kInfinite);
  EXPECT_EQ(improper_integral([](double) { return 1.0; }, 0.0).verdict, Verdict::kInfinite);
}

TEST(Improper, SignChangeIsIndeterminate) {
  const auto r = improper_integral([](double z) { return std::sin(z) / (1.0 + z * z); }, 0.0);
  EXPECT_EQ(r.verdict, Verdict::kIndeterminate);
}
