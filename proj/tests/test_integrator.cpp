#include <gtest/gtest.h>

#include <cmath>

#include "noisereg/integrator.hpp"
#include "noisereg/montecarlo.hpp"

using namespace noisereg;

namespace {
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}
}  // namespace

TEST(Tame, NormBelowOneProperty) {
  for (double s : {1e-3, 1.0, 1e6, 1e300}) {
    const Vec v = v2(s, -2 * s);
    for (double dt : {1e-9, 1e-3, 1.0}) EXPECT_LT(tame(v, dt).norm(), 1.0);
  }
}

TEST(Schemes, ParseRoundTrip) {
  for (auto s : {Scheme::kTamedEulerIto, Scheme::kEulerIto, Scheme::kHeunStratonovich,
                 Scheme::kYEulerAdditive, Scheme::kOdeAdaptive}) {
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  }
  EXPECT_FALSE(parse_scheme("rk45").has_value());
}

TEST(Steps, ConstantNoiseZeroDriftIsExact) {
  const ConstantNoiseModel model(Drift::zero(), 2.0 * identity(2));
  const Vec x = v2(1.0, 2.0), dw = v2(0.3, -0.1);
  const Vec expect = x + 2.0 * dw;
  EXPECT_LT((step_heun_stratonovich(model, x, 0.01, dw) - expect).norm(), 1e-15);
  EXPECT_LT((step_tamed_euler(model, x, 0.01, dw) - expect).norm(), 1e-15);
  EXPECT_LT((step_euler_ito(model, x, 0.01, dw) - expect).norm(), 1e-15);
}

TEST(Ode, BlowUpTimeOracle) {
  ModelParams p;
  const auto res = ode_solve_explosive(p, Drift::power(p), v2(1.0, 0.0), 1e-3, 10.0, 1e6);
  ASSERT_TRUE(res.reached);
  EXPECT_DOUBLE_EQ(res.t_star, 1.0);
  EXPECT_LE(res.t_reach, 1.0);
  EXPECT_GE(res.t_reach, 0.999);
}

TEST(Ode, ClosedFormRadius) {
  // m = 3: |x(t)| = (|x0|^{-2} - 2 kappa t)^{-1/2}, T* = |x0|^{-2} / 2.
  EXPECT_DOUBLE_EQ(power_blowup_time(1.0, 3.0, 2.0), 0.125);
  EXPECT_NEAR(power_ode_radius(1.0, 3.0, 2.0, 0.1), 1.0 / std::sqrt(0.25 - 0.2), 1e-12);
  EXPECT_THROW(power_ode_radius(1.0, 3.0, 2.0, 0.2), std::domain_error);
}

TEST(Paths, ThreadCountDoesNotChangeResults) {
  ModelParams p;
  EnsembleConfig ec;
  ec.n_paths = 24;
  ec.x0 = v2(2.0, 0.0);
  ec.scheme.t_end = 0.2;
  ec.scheme.inherit(p);
  ec.threads = 1;
  const auto a = run_x_ensemble(p, Drift::power(p), ec);
  ec.threads = 3;
  const auto b = run_x_ensemble(p, Drift::power(p), ec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].status, b[i].status);
    EXPECT_EQ(a[i].stop_time, b[i].stop_time);
    EXPECT_EQ(a[i].final_state, b[i].final_state);
    EXPECT_EQ(a[i].steps, b[i].steps);
  }
}

TEST(Paths, CheckpointsFrozenAfterStop) {
  ModelParams p;
  SchemeConfig sc;
  sc.inherit(p);
  sc.t_end = 2.0;
  sc.checkpoints = {0.5, 1.0, 2.0};
  ModelParams quiet = p;
  quiet.noise_scale = 0.0;
  sc.scheme = Scheme::kOdeAdaptive;
  const auto path = simulate_x_path(StratonovichModel(quiet, Drift::power(p)), sc, v2(2.0, 0.0), 0);
  ASSERT_EQ(path.status, PathStatus::kExploded);  // T* = 0.5
  ASSERT_EQ(path.checkpoint_states.size(), 3u);
  EXPECT_EQ(path.checkpoint_states[1], path.final_state);
  EXPECT_EQ(path.checkpoint_states[2], path.final_state);
}

TEST(Paths, WatchRadiusStopsOnEntry) {
  ModelParams p;
  SchemeConfig sc;
  sc.inherit(p);
  sc.watch_radius = 1.0;
  sc.t_end = 1.0;
  const auto path = simulate_x_path(StratonovichModel(p, Drift::power(p)), sc, v2(0.5, 0.0), 0);
  EXPECT_EQ(path.status, PathStatus::kEnteredBall);
  EXPECT_EQ(path.stop_time, 0.0);
}

TEST(Paths, StepLimitReported) {
  ModelParams p;
  SchemeConfig sc;
  sc.inherit(p);
  sc.max_steps = 10;
  sc.t_end = 1.0;
  const auto path = simulate_x_path(StratonovichModel(p, Drift::power(p)), sc, v2(2.0, 0.0), 0);
  EXPECT_EQ(path.status, PathStatus::kStepLimit);
  EXPECT_EQ(path.steps, 10u);
}

TEST(YPaths, BrownianHitsNearbyOrigin) {
  ModelParams p;
  p.d = 1;
  SchemeConfig sc;
  sc.inherit(p);
  sc.scheme = Scheme::kYEulerAdditive;
  sc.t_end = 50.0;
  sc.stop_at_outer = false;
  Vec y0(1);
  y0 << 0.01;
  int hits = 0;
  for (PathId id = 0; id < 50; ++id) {
    hits += simulate_y_path(BrownianModel(1), sc, y0, id).status == PathStatus::kHitZero;
  }
  EXPECT_GE(hits, 45);
}

TEST(YPaths, SegmentDistance) {
  EXPECT_DOUBLE_EQ(detail::segment_distance_to_origin(v2(-1.0, 1.0), v2(1.0, 1.0)), 1.0);
  EXPECT_DOUBLE_EQ(detail::segment_distance_to_origin(v2(1.0, 0.0), v2(2.0, 0.0)), 1.0);
  EXPECT_DOUBLE_EQ(detail::segment_distance_to_origin(v2(-1.0, 0.0), v2(1.0, 0.0)), 0.0);
}

TEST(Recording, StrideAndHeader) {
  ModelParams p;
  SchemeConfig sc;
  sc.inherit(p);
  sc.t_end = 0.05;
  sc.adaptive = false;
  sc.record_path = true;
  sc.record_every = 5;
  const auto path = simulate_x_path(StratonovichModel(p, Drift::power(p)), sc, v2(0.1, 0.0), 0);
  ASSERT_FALSE(path.times.empty());
  EXPECT_EQ(path.times.front(), 0.0);
  EXPECT_EQ(path.times.size(), path.states.size());
  EXPECT_NEAR(path.times.back(), 0.05, 1e-12);
}
