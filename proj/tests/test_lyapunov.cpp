#include <gtest/gtest.h>

#include <cmath>

#include "noisereg/lyapunov.hpp"
#include "noisereg/rng.hpp"

using namespace noisereg;

namespace {
// Root of log r = r (1 - alpha) / 2 above r = e: the radial sign change of LV
// for d = 2, m = 2, eta = 1, kappa = 1 (derived by hand, solved by bisection).
double planar_root(double alpha) {
  double lo = std::exp(1.0), hi = 1e3;
  auto f = [&](double r) { return std::log(r) - r * (1.0 - alpha) / 2.0; };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace

TEST(LyapunovProfile, ContinuousAndPlateau) {
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  EXPECT_EQ(prof.r0, 2.0);
  EXPECT_EQ(prof.r1, 3.0);
  EXPECT_EQ(lyapunov_radial(prof, 0.5).v, prof.a_floor);
  EXPECT_EQ(lyapunov_radial(prof, 0.5).dv, 0.0);
  for (double edge : {prof.r0, prof.r1}) {
    const auto lo = lyapunov_radial(prof, edge - 1e-9);
    const auto hi = lyapunov_radial(prof, edge + 1e-9);
    EXPECT_NEAR(lo.v, hi.v, 1e-8);
    EXPECT_NEAR(lo.dv, hi.dv, 1e-7);
    EXPECT_NEAR(lo.d2v, hi.d2v, 1e-6);
  }
  EXPECT_DOUBLE_EQ(lyapunov_radial(prof, 100.0).v, std::sqrt(std::log(100.0)));
}

TEST(LyapunovProfile, RejectsAlphaOutsideUnitInterval) {
  EXPECT_THROW(LyapunovProfile::make(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(LyapunovProfile::make(0.0, 1.0), std::invalid_argument);
}

TEST(Lyapunov, GradientAndHessianProperty) {
  const auto prof = LyapunovProfile::make(0.3, 1.0);
  for (std::uint64_t i = 0; i < 500; ++i) {
    const double r = 0.5 * std::pow(2000.0, uniform01(31, 0, i));
    Vec u = normal_vector(31, 1, i, 3);
    const Vec x = (r / u.norm()) * u;
    const Vec g = lyapunov_grad(prof, x);
    const Mat h = lyapunov_hess(prof, x);
    EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-15 * std::max(1.0, max_abs(h)));
    const double step = 1e-6 * r;
    for (int k = 0; k < 3; ++k) {
      Vec e = Vec::Zero(3);
      e[k] = step;
      const double fd = (lyapunov_v(prof, (x + e).eval()) - lyapunov_v(prof, (x - e).eval())) / (2 * step);
      EXPECT_NEAR(g[k], fd, 1e-6 * std::max(g.norm(), 1e-12));
    }
  }
}

TEST(Lyapunov, GenericMatchesClosedProperty) {
  for (int d : {2, 3, 4}) {
    ModelParams p;
    p.d = d;
    p.eta = 1.5;
    p.m = 2.5;
    const Drift b = Drift::power(p);
    const auto prof = LyapunovProfile::make(0.5, p.r_switch);
    for (std::uint64_t i = 0; i < 300; ++i) {
      const double r = prof.r1 * std::pow(1e5, uniform01(41, 0, i));
      Vec u = normal_vector(41, 1, i, d);
      const Vec x = (r / u.norm()) * u;
      const double c = lv_closed(prof, p, b, x);
      EXPECT_NEAR(lv_generic(prof, p, b, x), c, 1e-8 * std::abs(c));
    }
  }
}

TEST(Lyapunov, ClosedFormOutsideDomainThrows) {
  ModelParams p;
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  Vec x(2);
  x << 2.0, 0.0;
  EXPECT_THROW(lv_closed(prof, p, Drift::power(p), x), std::domain_error);
}

TEST(Negativity, PlanarRadiusMatchesHandOracle) {
  ModelParams p;
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  const auto res = negativity_radius(prof, p, Drift::power(p));
  ASSERT_EQ(res.status, NegativityResult::Status::kSignChange);
  EXPECT_TRUE(res.certificate_ok);
  const double oracle = planar_root(0.5);
  EXPECT_NEAR(res.r_star, oracle, 1e-3 * oracle);
  EXPECT_GE(res.r_star, oracle);
}

TEST(Negativity, SpatialCaseNegativeFromStart) {
  // For d = 3 the Ito correction -|x|^2 x dominates and LV < 0 for all r > 1.
  ModelParams p;
  p.d = 3;
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  const auto res = negativity_radius(prof, p, Drift::power(p));
  EXPECT_EQ(res.status, NegativityResult::Status::kNegativeFromStart);
  EXPECT_DOUBLE_EQ(res.r_star, prof.r1);
  EXPECT_TRUE(res.certificate_ok);
}

TEST(Negativity, StrongDriftNeverNegative) {
  // d = 2, m = 2.9, eta = 1: the drift term |x|^{m} dominates the noise.
  ModelParams p;
  p.m = 2.9;
  p.eta = 1.0;
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  NegativityOptions opt;
  opt.radius_cap = 1e6;
  const auto res = negativity_radius(prof, p, Drift::power(p), opt);
  EXPECT_FALSE(res.found());
}

TEST(KThreshold, PlugInValue) {
  EXPECT_EQ(k_threshold(1.0, 2.0, 1.0, 1.0), 2.0);
  // Second branch dominates for small c T.
  EXPECT_DOUBLE_EQ(k_threshold(0.01, 2.0, 0.0, 1.0), 200.0);
  EXPECT_THROW(k_threshold(0.0, 2.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(k_threshold(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(SuperLyapunov, FitAndAudit) {
  ModelParams p;
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  const auto fit = super_lyapunov_fit(prof, p, Drift::power(p), 1.5);
  EXPECT_GT(fit.c_coef, 0.0);
  EXPECT_TRUE(std::isfinite(fit.d0));
  EXPECT_TRUE(fit.audit_passed());
  EXPECT_DOUBLE_EQ(fit.k_t, k_threshold(fit.c_coef, 1.5, fit.d0, 1.0));
  EXPECT_THROW(super_lyapunov_fit(prof, p, Drift::power(p), 1.0), std::invalid_argument);
}
