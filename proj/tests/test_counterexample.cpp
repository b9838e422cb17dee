#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "noisereg/counterexample1d.hpp"

using namespace noisereg;

constexpr double kHalfPi = std::numbers::pi / 2;

TEST(Tangent, IntegralOfInverseDrift) {
  const auto r = explosion_criterion(ScalarModel::tangent());
  ASSERT_TRUE(r.finite());
  EXPECT_NEAR(r.value, kHalfPi, 1e-8);
  EXPECT_NEAR(explosion_time_1d(ScalarModel::tangent()), kHalfPi, 1e-8);
}

TEST(Tangent, PhiIsArctan) {
  const auto m = ScalarModel::tangent();
  for (double x : {-30.0, -1.0, 0.0, 0.5, 7.0}) EXPECT_NEAR(phi_1d(m, x), std::atan(x), 1e-10);
  EXPECT_NEAR(phi_limit(m).value, kHalfPi, 1e-8);
  EXPECT_NEAR(phi_inverse(m, 0.3), std::tan(0.3), 1e-9);
}

TEST(Tangent, OdeSolutionIsTan) {
  const auto m = ScalarModel::tangent();
  for (double t : {0.2, 1.0, 1.5}) EXPECT_NEAR(ode_solution_1d(m, t), std::tan(t), 1e-8 * std::tan(t));
  EXPECT_THROW(ode_solution_1d(m, 1.6), std::domain_error);
}

TEST(Tangent, TransformedDriftIsOne) {
  // b / sigma = 1 for b = sigma.
  const auto m = ScalarModel::tangent();
  for (double y : {-1.2, 0.0, 0.9, 1.5}) EXPECT_NEAR(a_drift(m, y), 1.0, 1e-8);
}

TEST(Criterion, LinearDriftNotExplosive) {
  ScalarModel m = ScalarModel::tangent();
  m.b = [](double z) { return 1.0 + std::abs(z); };
  EXPECT_EQ(explosion_criterion(m).verdict, Verdict::kInfinite);
}

TEST(Positivity, AuditFlagsZero) {
  ScalarModel m = ScalarModel::tangent();
  EXPECT_TRUE(audit_positivity(m).ok);
  m.sigma = [](double z) { return z; };
  EXPECT_FALSE(audit_positivity(m).ok);
}

TEST(Feller, ConstantDriftDiverges) {
  const auto r = feller_integral_explicit([](double) { return 1.0; }, [](double, double z) { return z; });
  EXPECT_EQ(r.verdict, Verdict::kInfinite);
}

TEST(Feller, QuadraticDriftFiniteAndBelowComparison) {
  // A = 1 + y^2 with I(y, z) = z + ((y + z)^3 - y^3) / 3.
  auto a = [](double y) { return 1.0 + y * y; };
  auto i = [](double y, double z) { return z + z * (y * y + y * z + z * z / 3.0); };
  const auto r = feller_integral_explicit(a, i);
  ASSERT_TRUE(r.finite());
  EXPECT_LE(r.value, kHalfPi + 1e-6);
  EXPECT_GT(r.value, 0.5);
}

TEST(Feller, ModelBranch) {
  const auto r = feller_integral(ScalarModel::feller());
  ASSERT_TRUE(r.feller.finite());
  EXPECT_TRUE(r.inequality_holds);
  EXPECT_NEAR(r.comparison.value, kHalfPi, 1e-6);
  EXPECT_THROW(feller_integral(ScalarModel::tangent()), std::invalid_argument);
}

TEST(Table, CubicIntegralExactForCubic) {
  std::vector<double> x, y;
  for (int i = 0; i <= 40; ++i) {
    x.push_back(-2.0 + 0.1 * i);
    y.push_back(x.back() * x.back());
  }
  const CubicTable t(x, y);
  EXPECT_NEAR(t(0.55), 0.3025, 1e-12);
  EXPECT_NEAR(t.integral(-1.0, 1.5), (1.5 * 1.5 * 1.5 + 1.0) / 3.0, 1e-12);
  EXPECT_NEAR(t.integral_span(-1.0, 2.5), (1.5 * 1.5 * 1.5 + 1.0) / 3.0, 1e-12);
}

TEST(MonteCarlo, SmallTangentRunMatchesInverseGaussian) {
  Mc1dConfig cfg;
  cfg.n_paths = 400;
  cfg.dt = 1e-3;
  cfg.checkpoints = {0.5, 2.0, 10.0};
  const auto r = explosion_mc_1d(ScalarModel::tangent(), cfg);
  EXPECT_TRUE(r.finite_branch);
  EXPECT_TRUE(r.nondecreasing());
  EXPECT_NEAR(r.fraction_upper[1], inverse_gaussian_cdf(kHalfPi, 1.0, 2.0), 0.08);
  EXPECT_GE(r.fraction[2], 0.98);
}
