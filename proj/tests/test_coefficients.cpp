#include <gtest/gtest.h>

#include <cmath>

#include "noisereg/coefficients.hpp"
#include "noisereg/rng.hpp"

using namespace noisereg;

namespace {
Vec random_point(Seed seed, std::uint64_t i, int d, double lo, double hi) {
  const double r = lo * std::pow(hi / lo, uniform01(seed, 0, i));
  Vec u = normal_vector(seed, 1, i, d);
  return (r / u.norm()) * u;
}
}  // namespace

TEST(Validate, AdmissibleDefaults) {
  ModelParams p;
  p.m = 2.0;
  p.eta = 1.0;
  EXPECT_TRUE(validate_params(p).ok());
}

TEST(Validate, EtaBelowThresholdNamesEta) {
  ModelParams p;
  p.m = 3.0;
  p.eta = 0.5;
  const auto rep = validate_params(p);
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations.front().key, "model.eta");
}

TEST(Validate, BoundaryIsExcluded) {
  ModelParams p;
  p.m = 3.0;
  p.eta = 1.0;  // (m-1)/2 = 1 exactly
  EXPECT_FALSE(validate_params(p).ok());
  p.eta = 1.0 + 1e-9;
  EXPECT_TRUE(validate_params(p).ok());
}

TEST(Validate, DimensionOneOnlyWhenAllowed) {
  ModelParams p;
  p.d = 1;
  EXPECT_FALSE(validate_params(p).ok());
  EXPECT_TRUE(validate_params(p, true).ok());
}

TEST(Smoothstep, EndpointsAndDerivatives) {
  EXPECT_EQ(smoothstep5(0.0).value, 0.0);
  EXPECT_EQ(smoothstep5(1.0).value, 1.0);
  EXPECT_DOUBLE_EQ(smoothstep5(0.5).value, 0.5);
  const double h = 1e-6;
  for (double u : {0.1, 0.37, 0.8}) {
    EXPECT_NEAR(smoothstep5(u).d1, (smoothstep5(u + h).value - smoothstep5(u - h).value) / (2 * h), 1e-7);
    EXPECT_NEAR(smoothstep5(u).d2, (smoothstep5(u + h).d1 - smoothstep5(u - h).d1) / (2 * h), 1e-6);
  }
}

TEST(Sigma, OuterFormulaEigenvalues) {
  // Radial eigenvalue -|x|^{eta+1}/eta, tangential |x|^{eta+1}.
  ModelParams p;
  p.d = 3;
  p.eta = 2.0;
  Vec x(3);
  x << 3.0, -1.0, 2.0;
  const double r = x.norm();
  const Mat s = sigma(p, x);
  const Vec xh = x / r;
  EXPECT_NEAR((s * xh - (-std::pow(r, 3.0) / 2.0) * xh).norm(), 0.0, 1e-10 * std::pow(r, 3.0));
  Vec t(3);
  t << 1.0, 3.0, 0.0;  // orthogonal to x
  EXPECT_NEAR((s * t - std::pow(r, 3.0) * t).norm(), 0.0, 1e-10 * std::pow(r, 3.0));
}

TEST(Sigma, InnerBallIsScaledIdentity) {
  ModelParams p;
  p.lambda_floor = 4.0;
  Vec x(2);
  x << 0.1, 0.2;
  EXPECT_LT(max_abs(sigma(p, x) - 2.0 * identity(2)), 1e-15);
}

TEST(Sigma, ContinuousAcrossShellEdges) {
  ModelParams p;
  for (double edge : {0.5 * p.r_switch, p.r_switch}) {
    const auto lo = sigma_profile(p, edge * (1 - 1e-9));
    const auto hi = sigma_profile(p, edge * (1 + 1e-9));
    EXPECT_NEAR(lo.f, hi.f, 1e-7);
    EXPECT_NEAR(lo.h, hi.h, 1e-7);
  }
}

TEST(Sigma, InverseProperty) {
  for (int d : {2, 3, 5}) {
    ModelParams p;
    p.d = d;
    p.eta = 1.5;
    for (std::uint64_t i = 0; i < 500; ++i) {
      const Vec x = random_point(77, i, d, p.r_switch, 1e3);
      EXPECT_LT(max_abs(sigma(p, x) * sigma_inverse(p, x) - identity(d)), 1e-10);
    }
  }
}

TEST(Diffusion, ClosedFormMatchesProduct) {
  ModelParams p;
  p.d = 4;
  p.eta = 0.75;
  p.m = 1.5;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const Vec x = random_point(3, i, 4, 1.0, 1e3);
    const Mat a = diffusion_matrix(p, x);
    EXPECT_LT(max_abs(a - diffusion_matrix_closed(p, x)) / max_abs(a), 1e-12);
  }
}

TEST(ItoCorrection, NumericMatchesClosedOutside) {
  for (int d : {2, 3}) {
    for (double eta : {1.0, 2.0}) {
      ModelParams p;
      p.d = d;
      p.eta = eta;
      for (std::uint64_t i = 0; i < 200; ++i) {
        const Vec x = random_point(11, i, d, 1.2, 50.0);
        const Vec c = ito_correction_closed(p, x);
        const Vec n = ito_correction_numeric(p, x);
        EXPECT_LT((c - n).norm(), 1e-6 * std::max(1.0, c.norm()));
      }
    }
  }
}

TEST(ItoCorrection, VanishesInPlaneForEtaOne) {
  // (d - 1 - 1/eta) = 0 at d = 2, eta = 1.
  ModelParams p;
  Vec x(2);
  x << 3.0, 4.0;
  EXPECT_EQ(ito_correction_closed(p, x).norm(), 0.0);
}

TEST(ItoCorrection, ZeroForConstantNoiseInside) {
  ModelParams p;
  Vec x(2);
  x << 0.1, -0.2;
  EXPECT_LT(ito_correction_numeric(p, x).norm(), 1e-12);
}

TEST(Drift, PowerFormAndGrowthAudit) {
  ModelParams p;
  p.kappa = 2.0;
  p.m = 3.0;
  p.eta = 1.5;
  p.c_growth = 2.0;
  const Drift b = Drift::power(p);
  Vec x(2);
  x << 3.0, 4.0;
  EXPECT_NEAR((b(x) - 2.0 * 25.0 * x).norm(), 0.0, 1e-12);
  EXPECT_TRUE(audit_growth(b, 2).ok());
  const Drift lying = Drift::custom([](const Vec& v) { return (10.0 * v.squaredNorm() * v).eval(); }, 2.0, 1.0);
  EXPECT_FALSE(audit_growth(lying, 2).ok());
}

TEST(Drift, ScaledMultipliesField) {
  const Drift b = Drift::power(1.0, 2.0, 1.0).scaled(3.0);
  Vec x(2);
  x << 1.0, 1.0;
  EXPECT_NEAR((b(x) - 3.0 * std::sqrt(2.0) * x).norm(), 0.0, 1e-14);
}

TEST(Ellipticity, InnerCoreMeetsLambdaButShellDoesNot) {
  // With the quintic blend the radial eigenvalue f + h passes through zero
  // inside the shell, so the scan over B_R reports a minimum below lambda.
  ModelParams p;
  const auto rep = ellipticity_scan(p, 20000);
  EXPECT_LT(rep.min_eigenvalue, p.lambda_floor);
  const double rmin = rep.argmin.norm();
  EXPECT_GT(rmin, 0.5 * p.r_switch);
  EXPECT_LT(rmin, p.r_switch);
  // Restricted to B_{R/2} the bound holds with equality.
  const auto core = ellipticity_scan(StratonovichModel(p, Drift::zero()), 0.5 * p.r_switch, p.lambda_floor, 2000);
  EXPECT_NEAR(core.min_eigenvalue, p.lambda_floor, 1e-12);
}
