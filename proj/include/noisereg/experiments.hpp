// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "noisereg/coefficients.hpp"
#include "noisereg/config.hpp"
#include "noisereg/counterexample1d.hpp"
#include "noisereg/integrator.hpp"
#include "noisereg/io.hpp"
#include "noisereg/lyapunov.hpp"
#include "noisereg/montecarlo.hpp"
#include "noisereg/rng.hpp"
#include "noisereg/statistics.hpp"
#include "noisereg/transform.hpp"

namespace noisereg {

/// Raised when the configured parameters are outside the admissible set.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(ValidationReport report)
      : std::runtime_error(describe(report)), report_(std::move(report)) {}
  [[nodiscard]] const ValidationReport& report() const { return report_; }

  static std::string describe(const ValidationReport& r) {
    std::string s = "invalid parameters:";
    for (const auto& v : r.violations) s += " " + v.key + " (" + v.message + ")";
    return s;
  }

 private:
  ValidationReport report_;
};

/// Result of one command: deterministic summary, CSV tables, pass flag.
struct Outcome {
  std::string command;
  bool passed = true;
  json checks = json::array();
  json results = json::object();
  std::vector<Table> tables;

  void check(const std::string& name, bool ok, json detail = json::object()) {
    json c{{"name", name}, {"passed", ok}};
    if (!detail.empty()) c["detail"] = std::move(detail);
    checks.push_back(std::move(c));
    passed = passed && ok;
  }

  [[nodiscard]] json summary() const {
    return json{{"command", command}, {"passed", passed}, {"checks", checks}, {"results", results}};
  }

  [[nodiscard]] std::vector<std::string> failed_checks() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
      if (!c.at("passed").get<bool>()) out.push_back(c.at("name").get<std::string>());
    }
    return out;
  }
};

struct RunContext {
  json cfg = default_config();
  int threads = 1;

  [[nodiscard]] Seed seed() const { return cfg.at("seed").get<Seed>(); }
  [[nodiscard]] Seed seed_for(std::uint64_t salt) const { return derive_seed(seed(), salt); }
};

// Salts separating the random streams of the experiments.
namespace salt {
inline constexpr std::uint64_t kSimulate = 1;
inline constexpr std::uint64_t kExplode = 2;
inline constexpr std::uint64_t kZeroFull = 3;
inline constexpr std::uint64_t kZeroBrownian = 4;
inline constexpr std::uint64_t kHitting = 5;
inline constexpr std::uint64_t kItoStrat = 6;
inline constexpr std::uint64_t kWeakDrift = 7;
inline constexpr std::uint64_t kErgodicityA = 8;
inline constexpr std::uint64_t kErgodicityB = 9;
inline constexpr std::uint64_t kCounterexample = 10;
inline constexpr std::uint64_t kIdentity = 11;
inline constexpr std::uint64_t kDerivatives = 12;
}  // namespace salt

namespace detail {

inline ModelParams checked_params(const json& cfg, bool allow_d1 = false) {
  const auto p = model_params(cfg);
  const auto rep = validate_params(p, allow_d1);
  if (!rep.ok()) throw ValidationError(rep);
  return p;
}

inline Vec point_for(const json& cfg, const char* key, int d) {
  std::string k = key;
  const auto dot = k.find('.');
  const Vec x = vec_from_json(cfg.at(k.substr(0, dot)).at(k.substr(dot + 1)), k);
  if (x.size() != d) throw ConfigError(k, "length " + std::to_string(x.size()) + " != model.d = " + std::to_string(d));
  return x;
}

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json times_json(const TimeSummary& s, double tol) {
  return json{{"q05", measured(s.q05, tol)}, {"q50", measured(s.q50, tol)},
              {"q95", measured(s.q95, tol)}, {"max", measured(s.max, tol)}};
}

inline json stats_json(const EnsembleStats& s, double time_tol) {
  return json{
      {"n_paths", exact_count(s.n_paths)},
      {"completed", exact_count(s.n_completed)},
      {"exploded", exact_count(s.n_exploded)},
      {"hit_zero", exact_count(s.n_hit_zero)},
      {"entered_ball", exact_count(s.n_entered)},
      {"invalid", exact_count(s.n_invalid)},
      {"step_limit", exact_count(s.n_step_limit)},
      {"dt_floor_hit", exact_count(s.n_floor_hit)},
      {"explosion_fraction", interval_json(s.explosion)},
      {"hit_zero_fraction", interval_json(s.hit_zero)},
      {"entered_fraction", interval_json(s.entered)},
      {"min_radius", exact(s.min_radius)},
      {"median_min_radius", exact(s.median_min_radius)},
      {"explosion_time", times_json(s.explosion_time_summary, time_tol)},
      {"entry_time", times_json(s.entry_time_summary, time_tol)},
  };
}

inline Table events_table(const std::vector<SdePath>& paths) {
  Table t{"events.csv", {"path_id", "status", "stop_time", "min_radius", "max_radius", "floor_hit"}, {}};
  for (const auto& p : paths) {
    t.rows.push_back({static_cast<double>(p.path_id), static_cast<double>(static_cast<int>(p.status)),
                      p.stop_time, p.min_radius, p.max_radius, p.floor_hit ? 1.0 : 0.0});
  }
  return t;
}

inline Table paths_table(const std::vector<SdePath>& paths, int d) {
  Table t{"paths.csv", {"t"}, {}};
  for (int i = 1; i <= d; ++i) t.header.push_back("x" + std::to_string(i));
  t.header.push_back("path_id");
  for (const auto& p : paths) {
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      std::vector<double> row{p.times[k]};
      for (int i = 0; i < d; ++i) row.push_back(p.states[k][i]);
      row.push_back(static_cast<double>(p.path_id));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

/// Fraction of events (times) at or before each grid time.
inline std::vector<double> cumulative_fraction(std::vector<double> times, std::size_t n,
                                               const std::vector<double>& grid) {
  std::sort(times.begin(), times.end());
  std::vector<double> out;
  for (double t : grid) {
    const auto k = std::upper_bound(times.begin(), times.end(), t) - times.begin();
    out.push_back(static_cast<double>(k) / static_cast<double>(n));
  }
  return out;
}

inline std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / std::max(1, n - 1));
  return g;
}

/// Largest LV_closed over the scan directions at radius r.
inline double worst_lv(const LyapunovProfile& prof, const ModelParams& p, const Drift& b,
                       const std::vector<Vec>& dirs, double r) {
  double w = -std::numeric_limits<double>::infinity();
  for (const auto& u : dirs) w = std::max(w, lv_closed(prof, p, b, (r * u).eval()));
  return w;
}

/// Random point with |x| log-uniform in [lo, hi].
inline Vec log_uniform_point(Seed seed, std::uint64_t idx, int d, double lo, double hi) {
  const double t = uniform01(seed, 0, idx);
  const double r = lo * std::pow(hi / lo, t);
  Vec u = normal_vector(seed, 1, idx, d);
  return (r / u.norm()) * u;
}

inline double inf_row_norm(const Mat& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace detail

//---------------------------------------------------------------------------//
// validate
//---------------------------------------------------------------------------//
inline Outcome run_validate(const RunContext& ctx) {
  Outcome out;
  out.command = "validate";
  const auto p = model_params(ctx.cfg);
  const auto rep = validate_params(p);
  json viol = json::array();
  for (const auto& v : rep.violations) viol.push_back(json{{"key", v.key}, {"message", v.message}});
  out.results["violations"] = viol;
  if (!rep.ok()) throw ValidationError(rep);
  const Drift b = drift_from_config(ctx.cfg, p);
  scheme_config(ctx.cfg, p);
  const auto growth = audit_growth(b, p.d);
  out.results["g_exponent"] = exact(g_exponent(p));
  out.results["growth_worst_ratio"] = measured(growth.worst_ratio, 1e-12);
  out.check("parameters admissible", rep.ok());
  out.check("g exponent above -1", g_exponent(p) > -1.0, json{{"exponent", exact(g_exponent(p))}});
  out.check("drift growth certificate", growth.ok(), json{{"worst_ratio", measured(growth.worst_ratio, 1e-12)}});
  // Ellipticity on B_R is diagnostic only: the radial eigenvalue of the blend crosses zero.
  const auto ell = ellipticity_scan(p, 20000);
  out.results["ellipticity"] = json{{"min_eigenvalue", measured(ell.min_eigenvalue, 1e-12)},
                                    {"lambda", exact(ell.lambda)},
                                    {"argmin", detail::vec_json(ell.argmin)},
                                    {"meets_lambda", ell.passed()}};
  return out;
}

//---------------------------------------------------------------------------//
// ode-blowup
//---------------------------------------------------------------------------//
inline Outcome run_ode_blowup(const RunContext& ctx) {
  Outcome out;
  out.command = "ode-blowup";
  const auto p = detail::checked_params(ctx.cfg);
  const Drift b = drift_from_config(ctx.cfg, p);
  const auto& o = ctx.cfg.at("ode");
  const Vec x0 = detail::point_for(ctx.cfg, "ode.x0", p.d);
  const double dt0 = o.at("dt0").get<double>();
  const double x_max = o.at("x_max").get<double>();

  SchemeConfig sc;
  sc.scheme = Scheme::kOdeAdaptive;
  sc.dt0 = dt0;
  sc.t_end = o.at("t_max").get<double>();
  sc.x_max = x_max;
  sc.record_path = true;
  ModelParams quiet = p;
  quiet.noise_scale = 0.0;
  const auto path = simulate_x_path(StratonovichModel(quiet, b), sc, x0, 0);
  const bool reached = path.status == PathStatus::kExploded;
  out.results["reached"] = reached;
  out.results["t_reach"] = measured(path.stop_time, dt0);
  out.results["steps"] = exact_count(path.steps);
  out.tables.push_back(detail::paths_table({path}, p.d));
  out.check("reached x_max", reached);

  if (b.kind() == Drift::Kind::kPower) {
    const double t_star = power_blowup_time(b.kappa(), b.growth_exponent(), x0.norm());
    // Tolerance of the closed-form radius comparison on |x| <= 1e3.
    double worst = 0.0;
    for (std::size_t k = 0; k < path.times.size(); ++k) {
      const double r = path.states[k].norm();
      if (r > 1e3) break;
      const double exact_r = power_ode_radius(b.kappa(), b.growth_exponent(), x0.norm(), path.times[k]);
      worst = std::max(worst, std::abs(r - exact_r) / exact_r);
    }
    out.results["t_star"] = exact(t_star);
    out.results["radius_max_rel_error"] = measured(worst, 1e-6);
    out.check("blow-up time within [T* - dt0, T*]",
              reached && path.stop_time >= t_star - dt0 && path.stop_time <= t_star,
              json{{"t_reach", measured(path.stop_time, dt0)}, {"t_star", exact(t_star)}});
    out.check("path matches closed-form radius", worst < 1e-6,
              json{{"max_rel_error", measured(worst, 1e-6)}});
  }
  return out;
}

//---------------------------------------------------------------------------//
// simulate
//---------------------------------------------------------------------------//
inline Outcome run_simulate(const RunContext& ctx) {
  Outcome out;
  out.command = "simulate";
  const auto p = detail::checked_params(ctx.cfg);
  const Drift b = drift_from_config(ctx.cfg, p);
  const auto& e = ctx.cfg.at("ensemble");
  SchemeConfig sc = effective_scheme(p, scheme_config(ctx.cfg, p));
  sc.seed = ctx.seed_for(salt::kSimulate);
  sc.checkpoints = doubles_from_json(e.at("checkpoints"), "ensemble.checkpoints");
  sc.record_every = e.at("record_every").get<std::uint64_t>();
  check_scheme_config(sc);
  const Vec x0 = detail::point_for(ctx.cfg, "ensemble.x0", p.d);
  const auto n = e.at("n_paths").get<std::size_t>();
  const auto n_record = std::min(n, e.at("record_paths").get<std::size_t>());
  SchemeConfig sc_rec = sc;
  sc_rec.record_path = true;
  const auto paths = run_paths(n, ctx.threads, [&](PathId id) {
    return simulate_path(p, b, id < n_record ? sc_rec : sc, x0, id);
  });
  const auto stats = summarize(paths);
  out.results["scheme"] = to_string(sc.scheme);
  out.results["stats"] = detail::stats_json(stats, sc.dt0);
  if (!sc.checkpoints.empty()) {
    json cps = json::array();
    for (std::size_t k = 0; k < sc.checkpoints.size(); ++k) {
      std::vector<double> radii;
      for (const auto& path : paths) radii.push_back(path.checkpoint_states.at(k).norm());
      cps.push_back(json{{"t", exact(sc.checkpoints[k])},
                         {"median_radius", exact(quantile(radii, 0.5))},
                         {"q90_radius", exact(quantile(radii, 0.9))}});
    }
    out.results["checkpoints"] = cps;
  }
  std::vector<SdePath> recorded(paths.begin(), paths.begin() + static_cast<std::ptrdiff_t>(n_record));
  out.tables.push_back(detail::paths_table(recorded, p.d));
  out.tables.push_back(detail::events_table(paths));
  out.check("invalid paths <= 0.1%", stats.invalid_ok(),
            json{{"invalid_fraction", exact(stats.invalid_fraction())}});
  return out;
}

//---------------------------------------------------------------------------//
// explode-prob
//---------------------------------------------------------------------------//
inline Outcome run_explode_prob(const RunContext& ctx) {
  Outcome out;
  out.command = "explode-prob";
  const auto p = detail::checked_params(ctx.cfg);
  const Drift b = drift_from_config(ctx.cfg, p);
  EnsembleConfig ec;
  ec.n_paths = ctx.cfg.at("ensemble").at("n_paths").get<std::size_t>();
  ec.x0 = detail::point_for(ctx.cfg, "ensemble.x0", p.d);
  ec.threads = ctx.threads;
  ec.scheme = scheme_config(ctx.cfg, p);
  ec.scheme.seed = ctx.seed_for(salt::kExplode);

  const auto paths = run_x_ensemble(p, b, ec);
  const auto stats = summarize(paths);
  out.results["stats"] = detail::stats_json(stats, ec.scheme.dt0);
  out.tables.push_back(detail::events_table(paths));
  out.check("invalid paths <= 0.1%", stats.invalid_ok(),
            json{{"invalid_fraction", exact(stats.invalid_fraction())}});
  out.check("explosion fraction <= 0.01", stats.explosion.estimate <= 0.01,
            json{{"explosion_fraction", interval_json(stats.explosion)}});

  // Control: same ensemble with the noise switched off.
  ModelParams quiet = p;
  quiet.noise_scale = 0.0;
  const auto control = summarize(run_x_ensemble(quiet, b, ec));
  json control_json{{"stats", detail::stats_json(control, ec.scheme.dt0)}};
  out.check("noise-off control explodes on every path", control.n_exploded == control.n_paths,
            json{{"explosion_fraction", interval_json(control.explosion)}});
  if (b.kind() == Drift::Kind::kPower) {
    const double t_star = power_blowup_time(b.kappa(), b.growth_exponent(), ec.x0.norm());
    double worst = 0.0;
    for (double t : control.explosion_times) worst = std::max(worst, std::abs(t - t_star));
    control_json["t_star"] = exact(t_star);
    control_json["max_abs_time_error"] = measured(worst, 1e-3);
    out.check("control explosion times within 1e-3 of T*",
              !control.explosion_times.empty() && worst <= 1e-3,
              json{{"max_abs_time_error", measured(worst, 1e-3)}});
  }
  out.results["noise_off_control"] = control_json;
  return out;
}

//---------------------------------------------------------------------------//
// zero-avoid
//---------------------------------------------------------------------------//
inline Outcome run_zero_avoid(const RunContext& ctx) {
  Outcome out;
  out.command = "zero-avoid";
  const auto p = detail::checked_params(ctx.cfg);
  const Drift b = drift_from_config(ctx.cfg, p);
  const auto& z = ctx.cfg.at("zero_avoid");
  const double y0 = z.at("y0").get<double>();
  const auto mode_name = z.at("mode").get<std::string>();
  if (mode_name != "full" && mode_name != "brownian") {
    throw ConfigError("zero_avoid.mode", "expected 'full' or 'brownian'");
  }
  if (!(y0 > p.eps_zero && y0 < p.r_y())) {
    throw ConfigError("zero_avoid.y0", "must lie in (eps_zero, r_switch^-eta)");
  }

  EnsembleConfig ec;
  ec.n_paths = z.at("n_paths").get<std::size_t>();
  ec.threads = ctx.threads;
  ec.scheme = scheme_config(ctx.cfg, p);
  ec.scheme.t_end = z.at("t_end").get<double>();
  ec.scheme.stop_at_outer = z.at("stop_at_outer").get<bool>();
  const auto grid = detail::linear_grid(0.0, ec.scheme.t_end, 51);
  Table curve{"hit_fraction.csv", {"t", "brownian_1d", "reflection_oracle", "model"}, {}};

  // One-dimensional Brownian reference with a closed-form hit probability.
  ModelParams p1 = p;
  p1.d = 1;
  Vec y1(1);
  y1 << y0;
  EnsembleConfig e1 = ec;
  e1.x0 = phi_inv(p1, y1);
  e1.scheme.seed = ctx.seed_for(salt::kZeroBrownian);
  e1.scheme.stop_at_outer = false;
  const auto s1 = zero_avoidance_y(p1, b, e1, YMode::kBrownian);
  const double level = y0 - p.eps_zero;
  const double oracle = reflection_hit_probability(level, ec.scheme.t_end);
  out.results["brownian_1d"] = json{{"hit_fraction", interval_json(s1.hit_zero)},
                                    {"oracle", exact(oracle)},
                                    {"tolerance", 0.03}};
  out.check("1-d Brownian hit fraction matches reflection oracle",
            std::abs(s1.hit_zero.estimate - oracle) <= 0.03,
            json{{"hit_fraction", interval_json(s1.hit_zero)}, {"oracle", measured(oracle, 0.03)}});

  // The configured model in the transformed coordinates.
  Vec yd = Vec::Zero(p.d);
  yd[0] = y0;
  EnsembleConfig ed = ec;
  ed.x0 = phi_inv(p, yd);
  ed.scheme.seed = ctx.seed_for(salt::kZeroFull);
  const auto sd = zero_avoidance_y(p, b, ed, mode_name == "full" ? YMode::kFull : YMode::kBrownian);
  out.results["model"] = json{{"mode", mode_name},
                              {"stop_at_outer", ed.scheme.stop_at_outer},
                              {"stats", detail::stats_json(sd, ec.scheme.dt0)}};
  out.check("model hit fraction is 0", sd.n_hit_zero == 0,
            json{{"hit_fraction", interval_json(sd.hit_zero)}});
  out.check("invalid paths <= 0.1%", s1.invalid_ok() && sd.invalid_ok());

  const auto f1 = detail::cumulative_fraction(s1.hit_times, s1.n_paths, grid);
  const auto fd = detail::cumulative_fraction(sd.hit_times, sd.n_paths, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    curve.rows.push_back({grid[i], f1[i], reflection_hit_probability(level, grid[i]), fd[i]});
  }
  out.tables.push_back(std::move(curve));
  return out;
}

//---------------------------------------------------------------------------//
// tau-r
//---------------------------------------------------------------------------//
inline Outcome run_tau_r(const RunContext& ctx) {
  Outcome out;
  out.command = "tau-r";
  const auto p = detail::checked_params(ctx.cfg);
  const Drift b = drift_from_config(ctx.cfg, p);
  const auto& h = ctx.cfg.at("hitting");
  EnsembleConfig ec;
  ec.n_paths = h.at("n_paths").get<std::size_t>();
  ec.x0 = detail::point_for(ctx.cfg, "hitting.x0", p.d);
  ec.threads = ctx.threads;
  ec.scheme = scheme_config(ctx.cfg, p);
  ec.scheme.t_end = h.at("t_end").get<double>();
  ec.scheme.seed = ctx.seed_for(salt::kHitting);
  ec.scheme.watch_radius = p.r_switch;
  if (!(ec.x0.norm() > p.r_switch)) throw ConfigError("hitting.x0", "must start outside B_R");

  const auto paths = run_x_ensemble(p, b, ec);
  const auto stats = summarize(paths);
  const std::size_t decided = stats.n_entered + stats.n_exploded;
  out.results["stats"] = detail::stats_json(stats, ec.scheme.dt0);
  out.results["decided"] = exact_count(decided);
  out.results["entered_among_decided"] =
      decided ? interval_json(wilson_interval(stats.n_entered, decided)) : json(nullptr);
  out.tables.push_back(detail::events_table(paths));
  out.check("every decided path enters B_R before exploding", stats.n_exploded == 0,
            json{{"exploded", exact_count(stats.n_exploded)}, {"decided", exact_count(decided)}});
  out.check("invalid paths <= 0.1%", stats.invalid_ok());
  return out;
}

//---------------------------------------------------------------------------//
// lyapunov-scan
//---------------------------------------------------------------------------//
inline Outcome run_lyapunov_scan(const RunContext& ctx) {
  Outcome out;
  out.command = "lyapunov-scan";
  const auto p = detail::checked_params(ctx.cfg);
  const Drift b = drift_from_config(ctx.cfg, p);
  const auto& l = ctx.cfg.at("lyapunov");
  const auto prof = LyapunovProfile::make(l.at("alpha").get<double>(), p.r_switch);
  const NegativityOptions opt;
  const auto neg = negativity_radius(prof, p, b, opt);
  out.results["status"] = to_string(neg.status);
  out.results["r_star"] = measured(neg.r_star, opt.rel_tol * neg.r_star);
  out.results["certificate_span"] = exact(opt.certificate_span);
  out.results["certificate_max_lv"] = measured(neg.certificate_max_lv, 0.0);
  out.check("negativity radius found", neg.found());
  out.check("LV_closed < 0 on [r*, 1e6 r*] x directions", neg.certificate_ok,
            json{{"max_lv", measured(neg.certificate_max_lv, 0.0)}});

  const auto dirs = scan_directions(p.d, opt.directions);
  const double r_lo = std::max(prof.r1, p.r_switch);
  if (neg.found()) {
    const double a = 0.9 * neg.r_star, c = 1.1 * neg.r_star;
    json bracket{{"r_lo", exact(a)}, {"r_hi", exact(c)}, {"domain_start", exact(r_lo)}};
    bool ok = false;
    if (a >= r_lo) {
      const double fa = detail::worst_lv(prof, p, b, dirs, a);
      const double fc = detail::worst_lv(prof, p, b, dirs, c);
      bracket["lv_at_r_lo"] = exact(fa);
      bracket["lv_at_r_hi"] = exact(fc);
      if (fa > 0.0 && fc < 0.0) {
        std::uintmax_t iters = 200;
        const auto root = boost::math::tools::toms748_solve(
            [&](double r) { return detail::worst_lv(prof, p, b, dirs, r); }, a, c, fa, fc,
            boost::math::tools::eps_tolerance<double>(40), iters);
        const double r_root = 0.5 * (root.first + root.second);
        bracket["root"] = measured(r_root, 2.0 * opt.rel_tol * neg.r_star);
        ok = std::abs(r_root - neg.r_star) <= 2.0 * opt.rel_tol * neg.r_star;
      }
    } else {
      bracket["note"] = "0.9 r* lies below the radius where LV_closed is defined";
    }
    out.results["bracket"] = bracket;
    out.check("root bracket LV(0.9 r*) > 0 > LV(1.1 r*) with matching root", ok, bracket);
  }

  const int n = l.at("profile_points").get<int>();
  Table prof_t{"lv_profile.csv", {"r", "lv_max", "lv_min", "v"}, {}};
  for (double r : log_grid(r_lo, 1e6 * r_lo, n)) {
    double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) {
      const double v = lv_closed(prof, p, b, (r * u).eval());
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    prof_t.rows.push_back({r, hi, lo, lyapunov_radial(prof, r).v});
  }
  out.tables.push_back(std::move(prof_t));
  return out;
}

//---------------------------------------------------------------------------//
// superlyap-fit
//---------------------------------------------------------------------------//
inline Outcome run_superlyap_fit(const RunContext& ctx) {
  Outcome out;
  out.command = "superlyap-fit";
  const auto p = detail::checked_params(ctx.cfg);
  const Drift b = drift_from_config(ctx.cfg, p);
  const auto& l = ctx.cfg.at("lyapunov");
  const auto prof = LyapunovProfile::make(l.at("alpha").get<double>(), p.r_switch);

  // Plug-in check of the K_T formula: c = 1, gamma = 2, d0 = 1, T = 1 gives 2.
  const double k_plug = k_threshold(1.0, 2.0, 1.0, 1.0);
  out.check("K_T plug-in (c=1, gamma=2, d0=1, T=1) equals 2", k_plug == 2.0,
            json{{"k_t", exact(k_plug)}});

  SuperLyapunovFit fit;
  try {
    fit = super_lyapunov_fit(prof, p, b, l.at("gamma").get<double>(), l.at("T_horizon").get<double>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("lyapunov.gamma", e.what());
  } catch (const std::runtime_error& e) {
    out.results["error"] = e.what();
    out.check("super-Lyapunov fit succeeded", false);
    return out;
  }
  out.results["gamma"] = exact(fit.gamma);
  out.results["c"] = measured(fit.c_coef, fit.c_coef);  // half the sampled infimum
  out.results["d0"] = measured(fit.d0, 0.0);
  out.results["T_horizon"] = exact(fit.T_horizon);
  out.results["K_T"] = measured(fit.k_t, 0.0);
  out.results["r_star"] = exact(fit.r_star);
  out.results["fit_radius"] = exact(fit.fit_radius);
  out.results["audit_points"] = exact_count(static_cast<std::size_t>(fit.audit_points));
  out.results["audit_violations"] = exact_count(static_cast<std::size_t>(fit.audit_violations));
  out.results["audit_worst_margin"] = measured(fit.audit_worst_margin, 0.0);
  out.check("c > 0", fit.c_coef > 0.0, json{{"c", measured(fit.c_coef, fit.c_coef)}});
  out.check("d0 finite", std::isfinite(fit.d0), json{{"d0", measured(fit.d0, 0.0)}});
  out.check("fresh-sample audit of LV <= -c V^gamma + d0", fit.audit_passed(),
            json{{"violations", exact_count(static_cast<std::size_t>(fit.audit_violations))},
                 {"points", exact_count(static_cast<std::size_t>(fit.audit_points))}});

  const auto dirs = scan_directions(p.d, 64);
  Table t{"lv_bound.csv", {"r", "lv_max", "bound"}, {}};
  for (double r : log_grid(1e-3, 1e6, 200)) {
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) hi = std::max(hi, lv_generic(prof, p, b, (r * u).eval()));
    const double v = lyapunov_radial(prof, r).v;
    t.rows.push_back({r, hi, -fit.c_coef * std::pow(v, fit.gamma) + fit.d0});
  }
  out.tables.push_back(std::move(t));
  return out;
}

//---------------------------------------------------------------------------//
// ito-strat-check
//---------------------------------------------------------------------------//
inline Outcome run_ito_strat(const RunContext& ctx) {
  Outcome out;
  out.command = "ito-strat-check";
  const auto& s = ctx.cfg.at("ito_strat");
  json cfg = ctx.cfg;
  cfg["model"]["d"] = s.at("d");
  const auto p = detail::checked_params(cfg);
  const Drift b = drift_from_config(cfg, p);
  const StratonovichModel model(p, b);

  ItoStratConfig ic;
  ic.x0 = detail::point_for(ctx.cfg, "ito_strat.x0", p.d);
  ic.dt0 = s.at("dt0").get<double>();
  ic.levels = s.at("levels").get<int>();
  ic.t_end = s.at("t_end").get<double>();
  ic.n_paths = s.at("n_paths").get<std::size_t>();
  ic.exit_radius = s.at("exit_radius").get<double>();
  ic.threads = ctx.threads;
  ic.seed = ctx.seed_for(salt::kItoStrat);
  const auto res = ito_stratonovich_consistency(model, ic);

  Table t{"refinement.csv", {"dt", "mean_sup_error"}, {}};
  json rows = json::array();
  for (const auto& r : res.rows) {
    t.rows.push_back({r.dt, r.mean_sup_error});
    rows.push_back(json{{"dt", exact(r.dt)}, {"mean_sup_error", measured(r.mean_sup_error, r.std_error)}});
  }
  out.tables.push_back(std::move(t));
  out.results["refinement"] = rows;
  out.check("mean sup discrepancy decreases (each halving within factor 1.5)", res.monotone_within(1.5));

  const auto weak_n = s.at("weak_samples").get<std::size_t>();
  json weak = json::array();
  std::uint64_t k = 0;
  for (double dt : doubles_from_json(s.at("weak_dts"), "ito_strat.weak_dts")) {
    const auto w = weak_drift_check(model, ic.x0, dt, weak_n, derive_seed(ctx.seed_for(salt::kWeakDrift), k++));
    json comps = json::array();
    for (int i = 0; i < p.d; ++i) {
      comps.push_back(json{{"mean", measured(w.mean_drift[i], w.std_error[i])}, {"ito_drift", exact(w.expected[i])}});
    }
    weak.push_back(json{{"dt", exact(dt)}, {"components", comps}, {"max_z", measured(w.max_z, 3.0)}});
    out.check("one-step weak drift matches Ito drift within 3 SE (dt=" + format_double(dt) + ")",
              w.within(3.0), json{{"max_z", measured(w.max_z, 3.0)}});
  }
  out.results["weak_drift"] = weak;
  return out;
}

//---------------------------------------------------------------------------//
// ergodicity
//---------------------------------------------------------------------------//
inline Outcome run_ergodicity(const RunContext& ctx) {
  Outcome out;
  out.command = "ergodicity";
  const auto p = detail::checked_params(ctx.cfg);
  const Drift b = drift_from_config(ctx.cfg, p);
  const auto& e = ctx.cfg.at("ergodicity");
  ErgodicityConfig ec;
  ec.n_paths = e.at("n_paths").get<std::size_t>();
  ec.x0_a = detail::point_for(ctx.cfg, "ergodicity.x0_a", p.d);
  ec.x0_b = detail::point_for(ctx.cfg, "ergodicity.x0_b", p.d);
  ec.checkpoints = doubles_from_json(e.at("checkpoints"), "ergodicity.checkpoints");
  ec.bins = e.at("bins").get<int>();
  ec.threads = ctx.threads;
  ec.seed_a = ctx.seed_for(salt::kErgodicityA);
  ec.seed_b = ctx.seed_for(salt::kErgodicityB);
  ec.scheme = scheme_config(ctx.cfg, p);
  ec.alpha = ctx.cfg.at("lyapunov").at("alpha").get<double>();
  {
    SchemeConfig probe = ec.scheme;
    probe.checkpoints = ec.checkpoints;
    probe.t_end = ec.checkpoints.empty() ? 1.0 : ec.checkpoints.back();
    try {
      check_scheme_config(probe);
    } catch (const std::invalid_argument& err) {
      throw ConfigError("ergodicity.checkpoints", err.what());
    }
  }

  auto attempt = [&](std::size_t n, json& record) {
    ec.n_paths = n;
    const auto res = ergodicity_experiment(p, b, ec);
    json decay = json::array();
    for (const auto& d : res.decay) {
      decay.push_back(json{{"t", exact(d.t)},
                           {"tv", measured(d.tv, d.tv_noise_floor)},
                           {"d1", measured(d.d1, d.noise_floor)},
                           {"noise_floor_formula", exact(d.noise_floor_formula)}});
    }
    const bool mono = res.d1_nonincreasing_within_floor();
    const bool tv_ok = !res.decay.empty() && res.decay.back().tv < 0.1;
    record = json{{"n_paths", exact_count(n)},
                  {"decay", decay},
                  {"rho_rate", measured(res.rho_rate, std::numeric_limits<double>::quiet_NaN())},
                  {"rate_fit_points", exact_count(res.n_fit_points)},
                  {"rate_fit_reliable", res.fit_reliable},
                  {"stats_a", detail::stats_json(res.stats_a, ec.scheme.dt0)},
                  {"stats_b", detail::stats_json(res.stats_b, ec.scheme.dt0)},
                  {"d1_nonincreasing_within_floor", mono},
                  {"final_tv_below_0.1", tv_ok}};
    return std::make_pair(res, mono && tv_ok);
  };

  json attempts = json::array();
  json first;
  auto [res, ok] = attempt(ec.n_paths, first);
  attempts.push_back(first);
  const auto rerun_n = e.at("rerun_n_paths").get<std::size_t>();
  if (!ok && rerun_n > ec.n_paths) {
    json second;
    std::tie(res, ok) = attempt(rerun_n, second);
    attempts.push_back(second);
  }
  out.results["attempts"] = attempts;
  Table t{"decay.csv", {"t", "tv", "d1", "noise_floor"}, {}};
  for (const auto& d : res.decay) t.rows.push_back({d.t, d.tv, d.d1, d.noise_floor});
  out.tables.push_back(std::move(t));
  out.check("d1 nonincreasing within noise floor", res.d1_nonincreasing_within_floor());
  out.check("final tv < 0.1", !res.decay.empty() && res.decay.back().tv < 0.1,
            json{{"tv", measured(res.decay.back().tv, res.decay.back().tv_noise_floor)}});
  out.check("invalid paths <= 0.1%", res.stats_a.invalid_ok() && res.stats_b.invalid_ok());
  return out;
}

//---------------------------------------------------------------------------//
// counterexample-1d
//---------------------------------------------------------------------------//
inline Outcome run_counterexample_1d(const RunContext& ctx) {
  Outcome out;
  out.command = "counterexample-1d";
  const auto& c = ctx.cfg.at("counterexample");
  constexpr double half_pi = std::numbers::pi / 2.0;
  const auto tangent = ScalarModel::tangent();

  const auto crit = explosion_criterion(tangent);
  const auto lim = phi_limit(tangent);
  out.results["int_inv_b"] = json{{"verdict", to_string(crit.verdict)}, {"value", measured(crit.value, 1e-8)}};
  out.results["phi_inf"] = json{{"verdict", to_string(lim.verdict)}, {"value", measured(lim.value, 1e-8)}};
  out.check("int_0^inf 1/b = pi/2 within 1e-8", crit.finite() && std::abs(crit.value - half_pi) <= 1e-8,
            json{{"value", measured(crit.value, 1e-8)}, {"oracle", exact(half_pi)}});
  out.check("phi(inf) = pi/2 within 1e-8", lim.finite() && std::abs(lim.value - half_pi) <= 1e-8,
            json{{"value", measured(lim.value, 1e-8)}, {"oracle", exact(half_pi)}});

  Mc1dConfig mc;
  mc.n_paths = c.at("n_paths").get<std::size_t>();
  mc.dt = c.at("dt").get<double>();
  mc.level_L = c.at("level_L").get<double>();
  mc.finite_eps = c.at("finite_eps").get<double>();
  mc.table_nodes = c.at("table_nodes").get<int>();
  mc.threads = ctx.threads;
  mc.seed = ctx.seed_for(salt::kCounterexample);
  const auto report_t = doubles_from_json(c.at("checkpoints"), "counterexample.checkpoints");
  if (report_t.empty()) throw ConfigError("counterexample.checkpoints", "must not be empty");
  const double t_end = *std::max_element(report_t.begin(), report_t.end());
  auto grid = detail::linear_grid(t_end / 50.0, t_end, 50);
  grid.insert(grid.end(), report_t.begin(), report_t.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  mc.checkpoints = grid;

  const auto r = explosion_mc_1d(tangent, mc);
  const double level = r.upper - r.y0;
  Table cdf{"explosion_cdf.csv", {"t", "mc_fraction", "mc_fraction_upper", "inverse_gaussian"}, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    cdf.rows.push_back({grid[k], r.fraction[k], r.fraction_upper[k], inverse_gaussian_cdf(level, 1.0, grid[k])});
  }
  out.tables.push_back(std::move(cdf));
  json mc_json = json::array();
  for (double t : report_t) {
    const auto k = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), t) - grid.begin());
    const double ig = inverse_gaussian_cdf(level, 1.0, t);
    mc_json.push_back(json{{"t", exact(t)},
                           {"fraction", interval_json(r.ci[k])},
                           {"fraction_upper", measured(r.fraction_upper[k], 0.03)},
                           {"inverse_gaussian", exact(ig)}});
  }
  out.results["monte_carlo"] = mc_json;
  out.results["levels"] = json{{"y0", exact(r.y0)}, {"upper", exact(r.upper)}, {"lower", exact(r.lower)}};

  auto at = [&](double t) {
    return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), t) - grid.begin());
  };
  if (std::find(report_t.begin(), report_t.end(), 10.0) != report_t.end()) {
    const auto k = at(10.0);
    const double ig = inverse_gaussian_cdf(level, 1.0, 10.0);
    out.check("MC explosion fraction by T=10 >= 0.99", r.fraction[k] >= 0.99,
              json{{"fraction", interval_json(r.ci[k])}});
    out.check("inverse-Gaussian oracle at T=10 >= 0.999", ig >= 0.999, json{{"oracle", exact(ig)}});
  }
  if (std::find(report_t.begin(), report_t.end(), 0.5) != report_t.end()) {
    const auto k = at(0.5);
    const double ig = inverse_gaussian_cdf(level, 1.0, 0.5);
    out.check("MC fraction at T=0.5 matches inverse-Gaussian CDF within 0.03",
              std::abs(r.fraction_upper[k] - ig) <= 0.03,
              json{{"fraction_upper", measured(r.fraction_upper[k], 0.03)}, {"oracle", exact(ig)}});
  }
  out.check("MC explosion fraction nondecreasing in t", r.nondecreasing());

  const auto feller = feller_integral(ScalarModel::feller());
  out.results["feller"] = json{{"verdict", to_string(feller.feller.verdict)},
                               {"value", measured(feller.feller.value, 1e-6)},
                               {"comparison_int_inv_a", measured(feller.comparison.value, 1e-6)}};
  out.check("Feller double integral finite and <= pi/2 + 1e-6",
            feller.feller.finite() && feller.feller.value <= half_pi + 1e-6 && feller.inequality_holds,
            json{{"value", measured(feller.feller.value, 1e-6)}, {"bound", exact(half_pi)}});
  return out;
}

//---------------------------------------------------------------------------//
// Library-level checks used by the acceptance run
//---------------------------------------------------------------------------//
inline Outcome check_inverse_identity(const RunContext& ctx) {
  Outcome out;
  out.command = "inverse-identity";
  json rows = json::array();
  for (auto [d, eta] : {std::pair{2, 1.0}, std::pair{3, 1.0}, std::pair{3, 2.0}}) {
    ModelParams p;
    p.d = d;
    p.eta = eta;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const Vec x = detail::log_uniform_point(ctx.seed_for(salt::kIdentity), i, d,
                                              p.r_switch * (1.0 + 1e-12), 100.0 * p.r_switch);
      worst = std::max(worst, detail::inf_row_norm(sigma(p, x) * dphi(p, x) - identity(d)));
    }
    rows.push_back(json{{"d", d}, {"eta", eta}, {"max_inf_norm", measured(worst, 1e-10)}});
    out.check("sigma Dphi = I (d=" + std::to_string(d) + ", eta=" + format_double(eta) + ")", worst < 1e-10,
              json{{"max_inf_norm", measured(worst, 1e-10)}});
  }
  out.results["cases"] = rows;
  return out;
}

inline Outcome check_closed_diffusion(const RunContext& ctx) {
  Outcome out;
  out.command = "closed-diffusion";
  json rows = json::array();
  for (auto [d, eta] : {std::pair{2, 1.0}, std::pair{3, 1.0}, std::pair{3, 2.0}}) {
    ModelParams p;
    p.d = d;
    p.eta = eta;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const Vec x = detail::log_uniform_point(ctx.seed_for(salt::kIdentity), i, d,
                                              p.r_switch * (1.0 + 1e-12), 100.0 * p.r_switch);
      const Mat s = sigma(p, x);
      // Independent form: |x|^{2 eta + 2} (I + (-1 + 1/eta^2) x x^T / |x|^2).
      const double r = x.norm();
      const Mat closed = std::pow(r, 2.0 * eta + 2.0) *
                         (identity(d) + (-1.0 + 1.0 / (eta * eta)) * (x * x.transpose()) / (r * r));
      worst = std::max(worst, max_abs(s * s.transpose() - closed) / max_abs(closed));
    }
    rows.push_back(json{{"d", d}, {"eta", eta}, {"max_rel_error", measured(worst, 1e-9)}});
    out.check("sigma sigma^T closed form (d=" + std::to_string(d) + ", eta=" + format_double(eta) + ")",
              worst < 1e-9, json{{"max_rel_error", measured(worst, 1e-9)}});
  }
  out.results["cases"] = rows;
  return out;
}

inline Outcome check_lyapunov_derivatives(const RunContext& ctx) {
  Outcome out;
  out.command = "lyapunov-derivatives";
  const double alpha = ctx.cfg.at("lyapunov").at("alpha").get<double>();
  json rows = json::array();
  for (int d : {2, 3}) {
    ModelParams p;
    p.d = d;
    const Drift b = Drift::power(p);
    const auto prof = LyapunovProfile::make(alpha, p.r_switch);
    double grad_err = 0.0, hess_err = 0.0, lv_err = 0.0;
    const Seed seed = derive_seed(ctx.seed_for(salt::kDerivatives), static_cast<std::uint64_t>(d));
    for (std::uint64_t i = 0; i < 2000; ++i) {
      const Vec x = detail::log_uniform_point(seed, i, d, 0.3, 1e3);
      const double r = x.norm();
      const Vec g = lyapunov_grad(prof, x);
      const Mat hm = lyapunov_hess(prof, x);
      Vec g_fd(d);
      Mat h_fd(d, d);
      const double hg = 1e-6 * r, hh = 1e-5 * r;
      for (int k = 0; k < d; ++k) {
        Vec e = Vec::Zero(d);
        e[k] = 1.0;
        g_fd[k] = (lyapunov_v(prof, (x + hg * e).eval()) - lyapunov_v(prof, (x - hg * e).eval())) / (2.0 * hg);
        h_fd.col(k) = (lyapunov_grad(prof, (x + hh * e).eval()) - lyapunov_grad(prof, (x - hh * e).eval())) / (2.0 * hh);
      }
      const double gn = g.lpNorm<Eigen::Infinity>(), hn = max_abs(hm);
      grad_err = std::max(grad_err, gn > 0.0 ? (g - g_fd).lpNorm<Eigen::Infinity>() / gn
                                             : g_fd.lpNorm<Eigen::Infinity>());
      hess_err = std::max(hess_err, hn > 0.0 ? max_abs(hm - h_fd) / hn : max_abs(h_fd));
    }
    for (std::uint64_t i = 0; i < 2000; ++i) {
      const Vec x = detail::log_uniform_point(seed, 10000 + i, d, prof.r1, 1e6);
      const double closed = lv_closed(prof, p, b, x);
      lv_err = std::max(lv_err, std::abs(lv_generic(prof, p, b, x) - closed) / std::abs(closed));
    }
    rows.push_back(json{{"d", d},
                        {"grad_rel_error", measured(grad_err, 1e-5)},
                        {"hess_rel_error", measured(hess_err, 1e-5)},
                        {"lv_rel_error", measured(lv_err, 1e-6)}});
    const std::string tag = " (d=" + std::to_string(d) + ")";
    out.check("grad V vs central differences" + tag, grad_err < 1e-5, json{{"rel_error", measured(grad_err, 1e-5)}});
    out.check("hess V vs central differences" + tag, hess_err < 1e-5, json{{"rel_error", measured(hess_err, 1e-5)}});
    out.check("LV_generic vs LV_closed" + tag, lv_err < 1e-6, json{{"rel_error", measured(lv_err, 1e-6)}});
  }
  out.results["cases"] = rows;
  return out;
}

//---------------------------------------------------------------------------//
// Command table and the acceptance run
//---------------------------------------------------------------------------//
using CommandFn = std::function<Outcome(const RunContext&)>;

inline const std::vector<std::pair<std::string, CommandFn>>& commands() {
  static const std::vector<std::pair<std::string, CommandFn>> table{
      {"validate", run_validate},
      {"ode-blowup", run_ode_blowup},
      {"simulate", run_simulate},
      {"explode-prob", run_explode_prob},
      {"zero-avoid", run_zero_avoid},
      {"tau-r", run_tau_r},
      {"lyapunov-scan", run_lyapunov_scan},
      {"superlyap-fit", run_superlyap_fit},
      {"ito-strat-check", run_ito_strat},
      {"ergodicity", run_ergodicity},
      {"counterexample-1d", run_counterexample_1d},
  };
  return table;
}

inline const CommandFn* find_command(const std::string& name) {
  for (const auto& [n, fn] : commands()) {
    if (n == name) return &fn;
  }
  return nullptr;
}

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  std::vector<Outcome> parts;
  std::string error;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  [[nodiscard]] bool all_passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
  }
  [[nodiscard]] json summary() const;
};

inline json AcceptanceReport::summary() const {
  json list = json::array();
  std::size_t n_pass = 0;
  for (const auto& c : criteria) {
    json parts = json::array();
    for (const auto& o : c.parts) parts.push_back(o.summary());
    json entry{{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"parts", parts}};
    if (!c.error.empty()) entry["error"] = c.error;
    list.push_back(std::move(entry));
    n_pass += c.passed ? 1 : 0;
  }
  return json{{"command", "all-acceptance"},
              {"passed", all_passed()},
              {"criteria_passed", exact_count(n_pass)},
              {"criteria_total", exact_count(criteria.size())},
              {"criteria", list}};
}

namespace detail {

inline RunContext with_overrides(const RunContext& base, const std::vector<std::string>& sets) {
  RunContext ctx = base;
  for (const auto& s : sets) apply_override(ctx.cfg, s);
  return ctx;
}

}  // namespace detail

/// Runs criteria 1-13 on `base`. `on_done` fires after each criterion.
inline AcceptanceReport run_acceptance(const RunContext& base,
                                       const std::function<void(const CriterionResult&)>& on_done = {}) {
  struct Plan {
    int id;
    std::string title;
    std::vector<std::pair<CommandFn, std::vector<std::string>>> parts;
  };
  const std::vector<Plan> plans{
      {1, "ODE blow-up oracle", {{run_ode_blowup, {"model.d=2", "model.m=2.0", "model.kappa=1.0", "ode.x0=[1.0,0.0]", "ode.x_max=1e6"}}}},
      {2, "Inverse identity sigma Dphi = I", {{check_inverse_identity, {}}}},
      {3, "Closed-form sigma sigma^T", {{check_closed_diffusion, {}}}},
      {4, "Lyapunov derivative checks", {{check_lyapunov_derivatives, {}}}},
      {5, "LV negativity radius", {{run_lyapunov_scan, {"model.d=2", "lyapunov.alpha=0.5"}},
                                   {run_lyapunov_scan, {"model.d=3", "lyapunov.alpha=0.5"}}}},
      {6, "Super-Lyapunov fit", {{run_superlyap_fit, {"lyapunov.gamma=1.5"}}}},
      {7, "Ito-Stratonovich consistency", {{run_ito_strat, {}}}},
      {8, "Zero-avoidance oracle pair", {{run_zero_avoid, {}}}},
      {9, "Non-explosion vs explosion", {{run_explode_prob, {"ensemble.n_paths=500", "scheme.name=\"tamed_euler_ito\"", "scheme.t_end=5.0"}}}},
      {10, "Hitting B_R before exploding", {{run_tau_r, {}}}},
      {11, "1-d counterexample", {{run_counterexample_1d, {}}}},
      {12, "Ergodicity probe", {{run_ergodicity, {}}}},
  };

  AcceptanceReport report;
  std::vector<std::string> first_dumps;  // summaries of criteria 7-12
  std::vector<std::pair<const Plan*, std::size_t>> replay;
  for (const auto& s : plans) {
    CriterionResult cr;
    cr.id = s.id;
    cr.title = s.title;
    const auto t0 = std::chrono::steady_clock::now();
    cr.passed = true;
    try {
      for (const auto& [fn, sets] : s.parts) {
        cr.parts.push_back(fn(detail::with_overrides(base, sets)));
        cr.passed = cr.passed && cr.parts.back().passed;
        if (s.id >= 7) first_dumps.push_back(render_json(cr.parts.back().summary()));
      }
    } catch (const std::exception& e) {
      cr.passed = false;
      cr.error = e.what();
    }
    cr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.criteria.push_back(cr);
    if (on_done) on_done(report.criteria.back());
  }

  // Criterion 13: rerun 7-12 with a different thread count and compare bytes.
  CriterionResult det;
  det.id = 13;
  det.title = "Determinism of summary.json";
  const auto t0 = std::chrono::steady_clock::now();
  RunContext other = base;
  other.threads = base.threads == 1 ? 2 : 1;
  Outcome cmp;
  cmp.command = "determinism";
  try {
    std::size_t k = 0;
    for (const auto& s : plans) {
      if (s.id < 7) continue;
      for (const auto& [fn, sets] : s.parts) {
        const auto again = render_json(fn(detail::with_overrides(other, sets)).summary());
        const bool same = k < first_dumps.size() && again == first_dumps[k];
        cmp.check("criterion " + std::to_string(s.id) + " summary byte-identical", same,
                  json{{"threads_first", base.threads}, {"threads_second", other.threads}});
        ++k;
      }
    }
    det.passed = cmp.passed && !cmp.checks.empty();
  } catch (const std::exception& e) {
    det.passed = false;
    det.error = e.what();
  }
  det.parts.push_back(cmp);
  det.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.criteria.push_back(det);
  if (on_done) on_done(report.criteria.back());
  return report;
}

}  // namespace noisereg
