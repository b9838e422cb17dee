#include <gtest/gtest.h>

#include <cmath>

#include "noisereg/montecarlo.hpp"

using namespace noisereg;

namespace {
std::vector<Vec> cloud(Seed seed, std::size_t n, double shift) {
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec z = normal_vector(seed, static_cast<PathId>(i), 0, 2);
    z[0] += shift;
    out.push_back(3.0 * z);
  }
  return out;
}
}  // namespace

TEST(Histogram, MassSumsToOne) {
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  const auto law = empirical_law(cloud(1, 5000, 0.0), 1.0, 16, prof);
  EXPECT_NEAR(law.total(), 1.0, 1e-12);
  EXPECT_EQ(law.n_samples, 5000u);
  for (double w : law.weight) EXPECT_GE(w, 1.0);
}

TEST(Histogram, NonFiniteStatesSkipped) {
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  auto states = cloud(1, 10, 0.0);
  Vec bad(2);
  bad << std::nan(""), 0.0;
  states.push_back(bad);
  EXPECT_EQ(empirical_law(states, 0.0, 8, prof).n_samples, 10u);
}

TEST(Distances, MetricProperties) {
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  const auto a = empirical_law(cloud(1, 4000, 0.0), 1.0, 16, prof);
  const auto b = empirical_law(cloud(2, 4000, 2.0), 1.0, 16, prof);
  EXPECT_EQ(tv_distance(a, a), 0.0);
  EXPECT_EQ(weighted_d1(a, a), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(a, b), tv_distance(b, a));
  EXPECT_LE(tv_distance(a, b), 1.0);
  EXPECT_GE(weighted_d1(a, b), 2.0 * tv_distance(a, b));  // weights are >= 1
}

TEST(Distances, DisjointSupportsHaveUnitTv) {
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  const auto a = empirical_law(std::vector<Vec>(10, Vec::Constant(2, -50.0)), 0.0, 4, prof);
  const auto b = empirical_law(std::vector<Vec>(10, Vec::Constant(2, 50.0)), 0.0, 4, prof);
  EXPECT_DOUBLE_EQ(tv_distance(a, b), 1.0);
}

TEST(Distances, GridMismatchThrows) {
  const auto prof = LyapunovProfile::make(0.5, 1.0);
  const auto a = empirical_law(cloud(1, 10, 0.0), 0.0, 4, prof);
  const auto b = empirical_law(cloud(1, 10, 0.0), 0.0, 8, prof);
  EXPECT_THROW(tv_distance(a, b), std::invalid_argument);
}

TEST(ItoStrat, ConstantNoiseHasNoDiscrepancy) {
  const ConstantNoiseModel model(Drift::zero(), identity(3));
  ItoStratConfig cfg;
  cfg.x0 = Vec::Ones(3);
  cfg.levels = 3;
  cfg.n_paths = 20;
  cfg.t_end = 0.1;
  const auto res = ito_stratonovich_consistency(model, cfg);
  ASSERT_EQ(res.rows.size(), 3u);
  for (const auto& row : res.rows) EXPECT_LT(row.mean_sup_error, 1e-12);
  EXPECT_DOUBLE_EQ(res.rows[2].dt, cfg.dt0 / 4);
}

TEST(ItoStrat, DiscrepancyShrinksWithStep) {
  ModelParams p;
  p.d = 3;
  ItoStratConfig cfg;
  cfg.x0 = Vec::Zero(3);
  cfg.x0[0] = 2.0;
  cfg.levels = 3;
  cfg.n_paths = 60;
  cfg.t_end = 0.2;
  const auto res = ito_stratonovich_consistency(StratonovichModel(p, Drift::power(p)), cfg);
  EXPECT_TRUE(res.monotone_within(1.5));
  EXPECT_LT(res.rows.back().mean_sup_error, res.rows.front().mean_sup_error);
}

TEST(WeakDrift, HeunMeanIsItoDrift) {
  ModelParams p;
  p.d = 3;
  const StratonovichModel model(p, Drift::power(p));
  Vec x = Vec::Zero(3);
  x[0] = 2.0;
  const auto w = weak_drift_check(model, x, 1e-3, 40000);
  EXPECT_TRUE(w.within(4.0));
  // The Stratonovich drift alone is far outside the error bars.
  EXPECT_GT((w.mean_drift - model.drift(x)).norm(), 5.0 * w.std_error.norm());
}

TEST(Ensemble, NoiseOffExplodesAtTStar) {
  ModelParams p;
  p.noise_scale = 0.0;
  EnsembleConfig ec;
  ec.n_paths = 4;
  ec.x0 = Vec::Zero(2);
  ec.x0[0] = 2.0;
  ec.scheme.inherit(p);
  const auto s = explosion_probability(p, Drift::power(p), ec);
  EXPECT_EQ(s.n_exploded, 4u);
  EXPECT_NEAR(s.explosion_time_summary.max, 0.5, 1e-3);
}
