// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "noisereg/coefficients.hpp"
#include "noisereg/integrator.hpp"
#include "noisereg/lyapunov.hpp"
#include "noisereg/parallel.hpp"
#include "noisereg/rng.hpp"
#include "noisereg/statistics.hpp"
#include "noisereg/transform.hpp"

namespace noisereg {

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//
struct EnsembleConfig {
  std::size_t n_paths = 500;
  Vec x0;
  int bins = 32;
  int threads = 1;
  SchemeConfig scheme;
};

struct TimeSummary {
  double q05 = std::numeric_limits<double>::quiet_NaN();
  double q50 = std::numeric_limits<double>::quiet_NaN();
  double q95 = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
};

inline TimeSummary summarize_times(const std::vector<double>& t) {
  TimeSummary s;
  if (t.empty()) return s;
  s.q05 = quantile(t, 0.05);
  s.q50 = quantile(t, 0.5);
  s.q95 = quantile(t, 0.95);
  s.max = *std::max_element(t.begin(), t.end());
  return s;
}

struct EnsembleStats {
  std::size_t n_paths = 0;
  std::size_t n_completed = 0;
  std::size_t n_exploded = 0;
  std::size_t n_hit_zero = 0;
  std::size_t n_entered = 0;
  std::size_t n_invalid = 0;
  std::size_t n_step_limit = 0;
  std::size_t n_floor_hit = 0;
  Interval explosion;
  Interval hit_zero;
  Interval entered;
  double min_radius = std::numeric_limits<double>::infinity();
  double median_min_radius = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> explosion_times;  // path-id order
  std::vector<double> hit_times;
  std::vector<double> entry_times;
  TimeSummary explosion_time_summary;
  TimeSummary entry_time_summary;

  [[nodiscard]] double invalid_fraction() const {
    return n_paths ? static_cast<double>(n_invalid + n_step_limit) / static_cast<double>(n_paths) : 0.0;
  }
  /// Experiments fail when more than 0.1% of paths are invalid.
  [[nodiscard]] bool invalid_ok() const { return invalid_fraction() <= 1e-3; }
};

inline EnsembleStats summarize(const std::vector<SdePath>& paths) {
  if (paths.empty()) throw std::invalid_argument("summarize: empty ensemble");
  EnsembleStats s;
  s.n_paths = paths.size();
  std::vector<double> min_r;
  min_r.reserve(paths.size());
  for (const auto& p : paths) {
    switch (p.status) {
      case PathStatus::kCompleted: ++s.n_completed; break;
      case PathStatus::kExploded: ++s.n_exploded; s.explosion_times.push_back(p.stop_time); break;
      case PathStatus::kHitZero: ++s.n_hit_zero; s.hit_times.push_back(p.stop_time); break;
      case PathStatus::kEnteredBall: ++s.n_entered; s.entry_times.push_back(p.stop_time); break;
      case PathStatus::kInvalid: ++s.n_invalid; break;
      case PathStatus::kStepLimit: ++s.n_step_limit; break;
    }
    if (p.floor_hit) ++s.n_floor_hit;
    s.min_radius = std::min(s.min_radius, p.min_radius);
    min_r.push_back(p.min_radius);
  }
  s.explosion = wilson_interval(s.n_exploded, s.n_paths);
  s.hit_zero = wilson_interval(s.n_hit_zero, s.n_paths);
  s.entered = wilson_interval(s.n_entered, s.n_paths);
  s.median_min_radius = quantile(min_r, 0.5);
  s.explosion_time_summary = summarize_times(s.explosion_times);
  s.entry_time_summary = summarize_times(s.entry_times);
  return s;
}

/// Runs sim(path_id) for path ids 0..n-1 and returns the paths in id order.
template <class Sim>
std::vector<SdePath> run_paths(std::size_t n, int threads, Sim&& sim) {
  std::vector<SdePath> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = sim(static_cast<PathId>(i)); });
  return out;
}

/// With the noise switched off the SDE schemes reduce to a tamed ODE solver
/// that cannot reach x_max in reasonable time; use the ODE integrator instead.
inline SchemeConfig effective_scheme(const ModelParams& p, SchemeConfig cfg) {
  if (p.noise_scale == 0.0 && cfg.scheme != Scheme::kYEulerAdditive) cfg.scheme = Scheme::kOdeAdaptive;
  return cfg;
}

inline std::vector<SdePath> run_x_ensemble(const ModelParams& p, const Drift& b,
                                           const EnsembleConfig& cfg) {
  const StratonovichModel model(p, b);
  const SchemeConfig sc = effective_scheme(p, cfg.scheme);
  return run_paths(cfg.n_paths, cfg.threads,
                   [&](PathId id) { return simulate_x_path(model, sc, cfg.x0, id); });
}

inline EnsembleStats explosion_probability(const ModelParams& p, const Drift& b,
                                           const EnsembleConfig& cfg) {
  if (p.d < 2) throw std::invalid_argument("explosion_probability: d must be >= 2");
  return summarize(run_x_ensemble(p, b, cfg));
}

enum class YMode {
  kFull,      // dY = g(Y) dt + dW
  kBrownian,  // g = 0: W + y0
};

/// Starts at y0 = phi(x0). kBrownian also admits d = 1.
inline EnsembleStats zero_avoidance_y(const ModelParams& p, const Drift& b,
                                      const EnsembleConfig& cfg, YMode mode) {
  SchemeConfig sc = cfg.scheme;
  sc.scheme = Scheme::kYEulerAdditive;
  const Vec y0 = phi(p, cfg.x0);
  if (mode == YMode::kBrownian) {
    const BrownianModel model(p.d);
    return summarize(run_paths(cfg.n_paths, cfg.threads,
                               [&](PathId id) { return simulate_y_path(model, sc, y0, id); }));
  }
  if (p.d < 2) throw std::invalid_argument("zero_avoidance_y: full mode needs d >= 2");
  const TransformContext ctx(p, b);
  return summarize(run_paths(cfg.n_paths, cfg.threads,
                             [&](PathId id) { return simulate_y_path(ctx, sc, y0, id); }));
}

struct HittingResult {
  EnsembleStats stats;
  std::size_t n_decided = 0;          // entered or exploded
  double entered_before_explosion = std::numeric_limits<double>::quiet_NaN();  // among decided
  [[nodiscard]] bool all_decided_entered() const { return stats.n_exploded == 0; }
};

/// Entry into B_R versus explosion, starting outside B_{R+1}.
inline HittingResult hitting_time_tauR(const ModelParams& p, const Drift& b, EnsembleConfig cfg) {
  cfg.scheme.watch_radius = p.r_switch;
  HittingResult res;
  res.stats = summarize(run_x_ensemble(p, b, cfg));
  res.n_decided = res.stats.n_entered + res.stats.n_exploded;
  if (res.n_decided > 0) {
    res.entered_before_explosion =
        static_cast<double>(res.stats.n_entered) / static_cast<double>(res.n_decided);
  }
  return res;
}

//---------------------------------------------------------------------------//
// Empirical laws
//---------------------------------------------------------------------------//
inline constexpr double kCompressionScale = 10.0;

struct HistogramLaw {
  int d = 0;
  int bins = 0;  // per axis on [-1, 1] after tanh compression
  double time = 0.0;
  std::vector<double> mass;    // row-major, axis 0 fastest
  std::vector<double> weight;  // 1 + V at the bin centre, mapped back to x
  std::size_t n_samples = 0;

  [[nodiscard]] double edge(int k) const { return -1.0 + 2.0 * k / bins; }
  [[nodiscard]] double total() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }
};

inline std::size_t histogram_cells(int d, int bins) {
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(bins);
  return n;
}

/// Bins tanh(x_i / 10) on a uniform grid of [-1, 1]^d. Non-finite states are
/// skipped and the masses renormalized over the rest.
inline HistogramLaw empirical_law(const std::vector<Vec>& states, double t, int bins,
                                  const LyapunovProfile& profile) {
  if (states.empty()) throw std::invalid_argument("empirical_law: no states");
  if (bins < 1) throw std::invalid_argument("empirical_law: bins < 1");
  HistogramLaw law;
  law.d = static_cast<int>(states.front().size());
  law.bins = bins;
  law.time = t;
  const std::size_t cells = histogram_cells(law.d, bins);
  std::vector<std::size_t> counts(cells, 0);
  for (const auto& x : states) {
    if (!all_finite(x)) continue;
    std::size_t idx = 0, stride = 1;
    for (int i = 0; i < law.d; ++i) {
      const double c = std::tanh(x[i] / kCompressionScale);
      const int k = std::clamp(static_cast<int>(std::floor((c + 1.0) * 0.5 * bins)), 0, bins - 1);
      idx += static_cast<std::size_t>(k) * stride;
      stride *= static_cast<std::size_t>(bins);
    }
    ++counts[idx];
    ++law.n_samples;
  }
  if (law.n_samples == 0) throw std::invalid_argument("empirical_law: no finite states");
  law.mass.resize(cells);
  law.weight.resize(cells);
  Vec centre(law.d);
  for (std::size_t c = 0; c < cells; ++c) {
    law.mass[c] = static_cast<double>(counts[c]) / static_cast<double>(law.n_samples);
    std::size_t rest = c;
    for (int i = 0; i < law.d; ++i) {
      const int k = static_cast<int>(rest % static_cast<std::size_t>(bins));
      rest /= static_cast<std::size_t>(bins);
      centre[i] = kCompressionScale * std::atanh(-1.0 + (2.0 * k + 1.0) / bins);
    }
    law.weight[c] = 1.0 + lyapunov_v(profile, centre);
  }
  return law;
}

/// Law at checkpoint k of an ensemble (stopped paths contribute their frozen state).
inline HistogramLaw empirical_law(const std::vector<SdePath>& paths, std::size_t k, double t,
                                  int bins, const LyapunovProfile& profile) {
  std::vector<Vec> states;
  states.reserve(paths.size());
  for (const auto& p : paths) {
    if (k >= p.checkpoint_states.size()) throw std::invalid_argument("empirical_law: no such checkpoint");
    states.push_back(p.checkpoint_states[k]);
  }
  return empirical_law(states, t, bins, profile);
}

inline void check_same_grid(const HistogramLaw& a, const HistogramLaw& b) {
  if (a.d != b.d || a.bins != b.bins || a.mass.size() != b.mass.size()) {
    throw std::invalid_argument("histogram grids differ");
  }
}

/// 1/2 sum |p - q|.
inline double tv_distance(const HistogramLaw& a, const HistogramLaw& b) {
  check_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) s += std::abs(a.mass[i] - b.mass[i]);
  return 0.5 * s;
}

/// sum (1 + V(centre)) |p - q|.
inline double weighted_d1(const HistogramLaw& a, const HistogramLaw& b) {
  check_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.mass.size(); ++i) s += a.weight[i] * std::abs(a.mass[i] - b.mass[i]);
  return s;
}

//---------------------------------------------------------------------------//
// Ergodicity probe
//---------------------------------------------------------------------------//
struct ErgodicityConfig {
  std::size_t n_paths = 2000;
  Vec x0_a;
  Vec x0_b;
  std::vector<double> checkpoints{1.0, 2.0, 4.0, 8.0};
  int bins = 32;
  int threads = 1;
  Seed seed_a = 1;
  Seed seed_b = 2;
  SchemeConfig scheme;  // t_end is set to the last checkpoint
  double alpha = 0.5;
};

struct DecayPoint {
  double t = 0.0;
  double tv = 0.0;
  double d1 = 0.0;
  double noise_floor = 0.0;          // bootstrap: d1 between half ensembles / sqrt 2
  double noise_floor_formula = 0.0;  // 2 sqrt(cells) / sqrt(N)
  double tv_noise_floor = 0.0;       // bootstrap, same construction for tv
};

struct ErgodicityResult {
  std::vector<DecayPoint> decay;
  double rho_rate = std::numeric_limits<double>::quiet_NaN();  // -slope of log d1 vs t
  std::size_t n_fit_points = 0;
  bool fit_reliable = false;
  EnsembleStats stats_a;
  EnsembleStats stats_b;

  /// d1_{k+1} <= d1_k + noise_floor_{k+1}.
  [[nodiscard]] bool d1_nonincreasing_within_floor() const {
    for (std::size_t k = 1; k < decay.size(); ++k) {
      if (decay[k].d1 > decay[k - 1].d1 + decay[k].noise_floor) return false;
    }
    return true;
  }
};

inline ErgodicityResult ergodicity_experiment(const ModelParams& p, const Drift& b,
                                              const ErgodicityConfig& cfg) {
  if (cfg.checkpoints.empty()) throw std::invalid_argument("ergodicity: no checkpoints");
  if (cfg.n_paths < 2) throw std::invalid_argument("ergodicity: need at least 2 paths");
  const auto profile = LyapunovProfile::make(cfg.alpha, p.r_switch);
  auto run = [&](const Vec& x0, Seed seed) {
    EnsembleConfig ec;
    ec.n_paths = cfg.n_paths;
    ec.x0 = x0;
    ec.threads = cfg.threads;
    ec.scheme = cfg.scheme;
    ec.scheme.seed = seed;
    ec.scheme.checkpoints = cfg.checkpoints;
    ec.scheme.t_end = cfg.checkpoints.back();
    return run_x_ensemble(p, b, ec);
  };
  const auto paths_a = run(cfg.x0_a, cfg.seed_a);
  const auto paths_b = run(cfg.x0_b, cfg.seed_b);

  auto halves = [](const std::vector<SdePath>& paths) {
    std::pair<std::vector<SdePath>, std::vector<SdePath>> h;
    for (std::size_t i = 0; i < paths.size(); ++i) (i % 2 ? h.second : h.first).push_back(paths[i]);
    return h;
  };
  const auto [a0, a1] = halves(paths_a);
  const auto [b0, b1] = halves(paths_b);

  ErgodicityResult res;
  res.stats_a = summarize(paths_a);
  res.stats_b = summarize(paths_b);
  std::vector<double> fit_t, fit_log;
  const double cells = static_cast<double>(histogram_cells(p.d, cfg.bins));
  for (std::size_t k = 0; k < cfg.checkpoints.size(); ++k) {
    const double t = cfg.checkpoints[k];
    const auto la = empirical_law(paths_a, k, t, cfg.bins, profile);
    const auto lb = empirical_law(paths_b, k, t, cfg.bins, profile);
    DecayPoint pt;
    pt.t = t;
    pt.tv = tv_distance(la, lb);
    pt.d1 = weighted_d1(la, lb);
    const auto ha0 = empirical_law(a0, k, t, cfg.bins, profile);
    const auto ha1 = empirical_law(a1, k, t, cfg.bins, profile);
    const auto hb0 = empirical_law(b0, k, t, cfg.bins, profile);
    const auto hb1 = empirical_law(b1, k, t, cfg.bins, profile);
    pt.noise_floor = std::max(weighted_d1(ha0, ha1), weighted_d1(hb0, hb1)) / std::numbers::sqrt2;
    pt.tv_noise_floor = std::max(tv_distance(ha0, ha1), tv_distance(hb0, hb1)) / std::numbers::sqrt2;
    pt.noise_floor_formula = 2.0 * std::sqrt(cells) / std::sqrt(static_cast<double>(cfg.n_paths));
    if (pt.d1 > pt.noise_floor && pt.d1 > 0.0) {
      fit_t.push_back(t);
      fit_log.push_back(std::log(pt.d1));
    }
    res.decay.push_back(pt);
  }
  res.n_fit_points = fit_t.size();
  res.fit_reliable = res.n_fit_points >= 3;
  if (res.n_fit_points >= 2) res.rho_rate = -least_squares(fit_t, fit_log).slope;
  return res;
}

//---------------------------------------------------------------------------//
// Ito versus Stratonovich
//---------------------------------------------------------------------------//
struct ItoStratConfig {
  Vec x0;
  double dt0 = 1e-3;
  int levels = 4;  // dt0, dt0/2, ..., dt0/2^{levels-1}
  double t_end = 1.0;
  std::size_t n_paths = 400;
  double exit_radius = 1e3;
  int threads = 1;
  Seed seed = 7;
};

struct RefinementRow {
  double dt = 0.0;
  double mean_sup_error = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

struct ItoStratResult {
  std::vector<RefinementRow> rows;
  std::vector<std::vector<double>> per_path;  // [level][path] sup discrepancy

  /// e_{k+1} <= slack e_k for every halving.
  [[nodiscard]] bool monotone_within(double slack) const {
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (rows[k].mean_sup_error > slack * rows[k - 1].mean_sup_error) return false;
    }
    return true;
  }
};

/// Heun-Stratonovich with b against tamed Euler-Ito with b~, driven by one
/// Brownian path per path id: the coarse increments are sums of the finest ones.
template <SdeCoefficients M>
ItoStratResult ito_stratonovich_consistency(const M& model, const ItoStratConfig& cfg) {
  if (cfg.levels < 1) throw std::invalid_argument("ito_strat: levels < 1");
  const int d = model.dim();
  const int finest_factor = 1 << (cfg.levels - 1);
  const double dt_fine = cfg.dt0 / finest_factor;
  const auto n_fine = static_cast<std::size_t>(std::llround(cfg.t_end / dt_fine));
  ItoStratResult res;
  res.per_path.assign(static_cast<std::size_t>(cfg.levels), std::vector<double>(cfg.n_paths, 0.0));

  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    const auto id = static_cast<PathId>(i);
    std::vector<double> z(n_fine * static_cast<std::size_t>(d));
    for (std::size_t s = 0; s < n_fine; ++s) {
      normal_increments(cfg.seed, id, s, std::span<double>(z.data() + s * d, static_cast<std::size_t>(d)));
    }
    for (int lvl = 0; lvl < cfg.levels; ++lvl) {
      const int group = finest_factor >> lvl;
      const double dt = dt_fine * group;
      const double sq = std::sqrt(dt_fine);
      Vec xh = cfg.x0, xe = cfg.x0, dW(d);
      double sup = 0.0;
      for (std::size_t s = 0; s + static_cast<std::size_t>(group) <= n_fine; s += static_cast<std::size_t>(group)) {
        dW.setZero();
        for (int j = 0; j < group; ++j) {
          for (int c = 0; c < d; ++c) dW[c] += sq * z[(s + static_cast<std::size_t>(j)) * d + c];
        }
        xh = step_heun_stratonovich(model, xh, dt, dW);
        xe = step_tamed_euler(model, xe, dt, dW);
        // Localized error: the comparison ends before the first step that
        // leaves B_exit (or overflows) in either scheme.
        if (!all_finite(xh) || !all_finite(xe)) break;
        if (xh.norm() >= cfg.exit_radius || xe.norm() >= cfg.exit_radius) break;
        sup = std::max(sup, (xh - xe).lpNorm<Eigen::Infinity>());
      }
      res.per_path[static_cast<std::size_t>(lvl)][i] = sup;
    }
  });

  for (int lvl = 0; lvl < cfg.levels; ++lvl) {
    const auto& v = res.per_path[static_cast<std::size_t>(lvl)];
    RefinementRow row;
    row.dt = cfg.dt0 / (1 << lvl);
    row.mean_sup_error = mean(v);
    row.std_error = cfg.n_paths > 1 ? stddev(v) / std::sqrt(static_cast<double>(cfg.n_paths)) : 0.0;
    row.n_paths = cfg.n_paths;
    res.rows.push_back(row);
  }
  return res;
}

struct WeakDriftCheck {
  Vec mean_drift;   // E[x' - x] / dt
  Vec std_error;
  Vec expected;     // Ito-form drift at x
  double max_z = 0.0;  // max_i |mean_i - expected_i| / se_i
  [[nodiscard]] bool within(double k) const { return max_z <= k; }
};

/// One Heun step from x repeated n times: its mean displacement estimates the
/// Ito drift, not the Stratonovich one.
template <SdeCoefficients M>
WeakDriftCheck weak_drift_check(const M& model, const Vec& x, double dt, std::size_t n,
                                Seed seed = 11) {
  const int d = model.dim();
  Vec sum = Vec::Zero(d), sumsq = Vec::Zero(d), z(d);
  for (std::size_t i = 0; i < n; ++i) {
    normal_increments(seed, static_cast<PathId>(i), 0, std::span<double>(z.data(), d));
    const Vec inc = (step_heun_stratonovich(model, x, dt, (std::sqrt(dt) * z).eval()) - x) / dt;
    sum += inc;
    sumsq += inc.cwiseProduct(inc);
  }
  WeakDriftCheck out;
  const double nn = static_cast<double>(n);
  out.mean_drift = sum / nn;
  const Vec var = (sumsq / nn - out.mean_drift.cwiseProduct(out.mean_drift)) * (nn / (nn - 1.0));
  out.std_error = (var / nn).cwiseSqrt();
  out.expected = model.ito_drift(x);
  for (int i = 0; i < d; ++i) {
    const double se = out.std_error[i];
    const double diff = std::abs(out.mean_drift[i] - out.expected[i]);
    out.max_z = std::max(out.max_z, se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()));
  }
  return out;
}

}  // namespace noisereg
