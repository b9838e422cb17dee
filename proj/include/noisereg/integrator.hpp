// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "noisereg/coefficients.hpp"
#include "noisereg/rng.hpp"
#include "noisereg/transform.hpp"
#include "noisereg/types.hpp"

namespace noisereg {

enum class Scheme {
  kTamedEulerIto,
  kEulerIto,
  kHeunStratonovich,
  kYEulerAdditive,
  kOdeAdaptive,
};

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kTamedEulerIto: return "tamed_euler_ito";
    case Scheme::kEulerIto: return "euler_ito";
    case Scheme::kHeunStratonovich: return "heun_stratonovich";
    case Scheme::kYEulerAdditive: return "y_euler_additive";
    case Scheme::kOdeAdaptive: return "ode_adaptive";
  }
  return "unknown";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::kTamedEulerIto, Scheme::kEulerIto, Scheme::kHeunStratonovich,
                   Scheme::kYEulerAdditive, Scheme::kOdeAdaptive}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

struct SchemeConfig {
  Scheme scheme = Scheme::kTamedEulerIto;
  double dt0 = 1e-3;
  double t_end = 5.0;
  bool adaptive = true;
  double x_max = 1e8;
  double eps_zero = 1e-4;
  Seed seed = 20240611;
  double watch_radius = 0.0;   // > 0 stops X paths on entering B_watch
  bool stop_at_outer = true;   // Y paths stop on leaving B_{R^-eta}
  std::vector<double> checkpoints;
  bool record_path = false;
  std::uint64_t record_every = 1;
  std::uint64_t max_steps = 400'000'000;

  [[nodiscard]] double dt_floor() const { return dt0 * 0x1p-20; }

  /// Copies x_max and eps_zero from the model parameters.
  SchemeConfig& inherit(const ModelParams& p) {
    x_max = p.x_max;
    eps_zero = p.eps_zero;
    return *this;
  }
};

inline void check_scheme_config(const SchemeConfig& c) {
  if (!(c.dt0 > 0.0)) throw std::invalid_argument("scheme.dt0 must be > 0");
  if (!(c.t_end > 0.0)) throw std::invalid_argument("scheme.t_end must be > 0");
  for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
    if (!(c.checkpoints[i] > 0.0) || c.checkpoints[i] > c.t_end ||
        (i > 0 && !(c.checkpoints[i] > c.checkpoints[i - 1]))) {
      throw std::invalid_argument("checkpoints must be increasing and within (0, t_end]");
    }
  }
  if (c.record_every == 0) throw std::invalid_argument("record_every must be >= 1");
}

enum class PathStatus {
  kCompleted,
  kExploded,
  kHitZero,
  kEnteredBall,
  kInvalid,    // non-finite state
  kStepLimit,  // max_steps exhausted before t_end
};

inline const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::kCompleted: return "completed";
    case PathStatus::kExploded: return "exploded";
    case PathStatus::kHitZero: return "hit_zero";
    case PathStatus::kEnteredBall: return "entered_ball";
    case PathStatus::kInvalid: return "invalid";
    case PathStatus::kStepLimit: return "step_limit";
  }
  return "unknown";
}

struct SdePath {
  PathId path_id = 0;
  Seed seed = 0;
  PathStatus status = PathStatus::kCompleted;
  double stop_time = 0.0;  // t_end when completed
  Vec final_state;
  std::vector<double> times;  // filled when record_path is set
  std::vector<Vec> states;
  std::vector<Vec> checkpoint_states;  // frozen at the stopped state after a stop
  double min_radius = std::numeric_limits<double>::infinity();
  double max_radius = 0.0;
  bool floor_hit = false;
  std::uint64_t steps = 0;

  [[nodiscard]] bool stopped_early() const { return status != PathStatus::kCompleted; }
};

//---------------------------------------------------------------------------//
// Single steps
//---------------------------------------------------------------------------//

/// dt v / (1 + dt |v|); its norm is always below 1.
inline Vec tame(const Vec& v, double dt) { return (dt / (1.0 + dt * v.norm())) * v; }

template <SdeCoefficients M>
Vec step_tamed_euler(const M& model, const Vec& x, double dt, const Vec& dW) {
  return x + tame(model.ito_drift(x), dt) + model.sigma(x) * dW;
}

template <SdeCoefficients M>
Vec step_euler_ito(const M& model, const Vec& x, double dt, const Vec& dW) {
  return x + dt * model.ito_drift(x) + model.sigma(x) * dW;
}

/// Predictor-corrector with the diffusion evaluated at both ends, which
/// converges to the Stratonovich solution. Drift terms are tamed individually.
template <SdeCoefficients M>
Vec step_heun_stratonovich(const M& model, const Vec& x, double dt, const Vec& dW) {
  const Vec bx = tame(model.drift(x), dt);
  const Mat sx = model.sigma(x);
  const Vec pred = x + bx + sx * dW;
  const Vec bp = tame(model.drift(pred), dt);
  const Mat sp = model.sigma(pred);
  return x + 0.5 * (bx + bp) + 0.5 * ((sx + sp) * dW);
}

inline Vec step_tamed_euler(const ModelParams& p, const Drift& b, const Vec& x, double dt,
                            const Vec& dW) {
  return step_tamed_euler(StratonovichModel(p, b), x, dt, dW);
}

inline Vec step_heun_stratonovich(const ModelParams& p, const Drift& b, const Vec& x, double dt,
                                  const Vec& dW) {
  return step_heun_stratonovich(StratonovichModel(p, b), x, dt, dW);
}

template <class F>
Vec rk4_step(const F& f, const Vec& x, double dt) {
  const Vec k1 = f(x);
  const Vec k2 = f((x + 0.5 * dt * k1).eval());
  const Vec k3 = f((x + 0.5 * dt * k2).eval());
  const Vec k4 = f((x + dt * k3).eval());
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Models of the form dY = g(Y) dt + dW.
template <class M>
concept AdditiveNoiseModel = requires(const M& model, const Vec& y) {
  { model.dim() } -> std::convertible_to<int>;
  { model.drift(y) } -> std::convertible_to<Vec>;
  { model.outer_radius() } -> std::convertible_to<double>;
};

/// Pure Brownian motion in R^d (the g = 0 comparison mode).
class BrownianModel {
 public:
  explicit BrownianModel(int d) : d_(d) {}
  [[nodiscard]] int dim() const { return d_; }
  [[nodiscard]] Vec drift(const Vec& y) const { return Vec::Zero(y.size()); }
  [[nodiscard]] double outer_radius() const { return std::numeric_limits<double>::infinity(); }

 private:
  int d_;
};

template <AdditiveNoiseModel M>
Vec step_y_additive(const M& model, const Vec& y, double dt, const Vec& dW) {
  return y + dt * model.drift(y) + dW;
}

//---------------------------------------------------------------------------//
// Path drivers
//---------------------------------------------------------------------------//
namespace detail {

// Tracks checkpoints, recording and the final bookkeeping shared by all drivers.
class PathRecorder {
 public:
  PathRecorder(const SchemeConfig& cfg, PathId id, const Vec& x0) : cfg_(cfg) {
    path_.path_id = id;
    path_.seed = cfg.seed;
    path_.final_state = x0;
    path_.checkpoint_states.reserve(cfg.checkpoints.size());
    if (cfg.record_path) {
      path_.times.push_back(0.0);
      path_.states.push_back(x0);
    }
  }

  /// Next time the integrator must land on exactly.
  [[nodiscard]] double next_stop() const {
    const auto k = path_.checkpoint_states.size();
    return k < cfg_.checkpoints.size() ? cfg_.checkpoints[k] : cfg_.t_end;
  }

  void advance(double t, const Vec& x) {
    ++path_.steps;
    path_.final_state = x;
    const auto k = path_.checkpoint_states.size();
    if (k < cfg_.checkpoints.size() && t >= cfg_.checkpoints[k]) path_.checkpoint_states.push_back(x);
    if (cfg_.record_path && path_.steps % cfg_.record_every == 0) {
      path_.times.push_back(t);
      path_.states.push_back(x);
    }
  }

  void radius(double r) {
    path_.min_radius = std::min(path_.min_radius, r);
    path_.max_radius = std::max(path_.max_radius, r);
  }

  SdePath finish(PathStatus status, double t, const Vec& x) {
    path_.status = status;
    path_.stop_time = t;
    path_.final_state = x;
    while (path_.checkpoint_states.size() < cfg_.checkpoints.size()) path_.checkpoint_states.push_back(x);
    if (cfg_.record_path && (path_.times.empty() || path_.times.back() != t)) {
      path_.times.push_back(t);
      path_.states.push_back(x);
    }
    return std::move(path_);
  }

  SdePath& path() { return path_; }

 private:
  const SchemeConfig& cfg_;
  SdePath path_;
};

// Distance from the origin to the segment [a, b].
inline double segment_distance_to_origin(const Vec& a, const Vec& b) {
  const Vec d = b - a;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return a.norm();
  const double s = std::clamp(-a.dot(d) / dd, 0.0, 1.0);
  return (a + s * d).norm();
}

}  // namespace detail

/// Simulates the X equation with one of the X schemes (not y_euler_additive).
template <SdeCoefficients M>
SdePath simulate_x_path(const M& model, const SchemeConfig& cfg, const Vec& x0, PathId path_id) {
  check_scheme_config(cfg);
  if (cfg.scheme == Scheme::kYEulerAdditive) {
    throw std::invalid_argument("simulate_x_path: y_euler_additive needs a transformed model");
  }
  const int d = model.dim();
  if (x0.size() != d) throw std::invalid_argument("simulate_x_path: x0 has the wrong dimension");
  detail::PathRecorder rec(cfg, path_id, x0);
  Vec x = x0;
  double t = 0.0;
  rec.radius(x.norm());
  if (!all_finite(x)) return rec.finish(PathStatus::kInvalid, 0.0, x);
  if (x.norm() >= cfg.x_max) return rec.finish(PathStatus::kExploded, 0.0, x);
  if (cfg.watch_radius > 0.0 && x.norm() < cfg.watch_radius) {
    return rec.finish(PathStatus::kEnteredBall, 0.0, x);
  }

  const double floor = cfg.dt_floor();
  Vec z(d);
  while (t < cfg.t_end) {
    if (rec.path().steps >= cfg.max_steps) return rec.finish(PathStatus::kStepLimit, t, x);
    const double target = rec.next_stop();

    Vec next;
    double dt = cfg.dt0;
    if (cfg.scheme == Scheme::kOdeAdaptive) {
      const Vec bx = model.drift(x);
      if (cfg.adaptive) dt = cfg.dt0 * (1.0 + x.norm()) / (1.0 + bx.norm());
      if (dt < floor) {
        dt = floor;
        rec.path().floor_hit = true;
      }
      const bool clamped = t + dt >= target;
      if (clamped) dt = target - t;
      next = rk4_step([&](const Vec& v) { return model.drift(v); }, x, dt);
      t = clamped ? target : t + dt;
    } else {
      const Vec bt = model.ito_drift(x);
      if (cfg.adaptive) dt = cfg.dt0 / (1.0 + bt.norm());
      if (dt < floor) {
        dt = floor;
        rec.path().floor_hit = true;
      }
      const bool clamped = t + dt >= target;
      if (clamped) dt = target - t;
      normal_increments(cfg.seed, path_id, rec.path().steps, std::span<double>(z.data(), d));
      const Vec dW = std::sqrt(dt) * z;
      switch (cfg.scheme) {
        case Scheme::kTamedEulerIto: next = x + tame(bt, dt) + model.sigma(x) * dW; break;
        case Scheme::kEulerIto: next = x + dt * bt + model.sigma(x) * dW; break;
        default: next = step_heun_stratonovich(model, x, dt, dW); break;
      }
      t = clamped ? target : t + dt;
    }
    x = next;
    rec.advance(t, x);
    if (!all_finite(x)) return rec.finish(PathStatus::kInvalid, t, x);
    const double r = x.norm();
    rec.radius(r);
    if (r >= cfg.x_max) return rec.finish(PathStatus::kExploded, t, x);
    if (cfg.watch_radius > 0.0 && r < cfg.watch_radius) {
      return rec.finish(PathStatus::kEnteredBall, t, x);
    }
  }
  return rec.finish(PathStatus::kCompleted, t, x);
}

/// Simulates dY = g(Y) dt + dW from y0 with step halving near the singularity.
/// min_radius records the closest approach of the piecewise-linear path to 0.
template <AdditiveNoiseModel M>
SdePath simulate_y_path(const M& model, const SchemeConfig& cfg, const Vec& y0, PathId path_id) {
  check_scheme_config(cfg);
  const int d = model.dim();
  if (y0.size() != d) throw std::invalid_argument("simulate_y_path: y0 has the wrong dimension");
  if (y0.norm() == 0.0) throw std::domain_error("simulate_y_path: y0 = 0");
  detail::PathRecorder rec(cfg, path_id, y0);
  Vec y = y0;
  double t = 0.0;
  rec.radius(y.norm());
  if (y.norm() <= cfg.eps_zero) return rec.finish(PathStatus::kHitZero, 0.0, y);
  const double outer = model.outer_radius();
  if (cfg.stop_at_outer && y.norm() >= outer) return rec.finish(PathStatus::kEnteredBall, 0.0, y);

  const double floor = cfg.dt_floor();
  Vec z(d);
  while (t < cfg.t_end) {
    if (rec.path().steps >= cfg.max_steps) return rec.finish(PathStatus::kStepLimit, t, y);
    const double target = rec.next_stop();
    double dt = std::min(cfg.dt0, target - t);
    const Vec g = model.drift(y);
    const double gn = g.norm();
    const double yn = y.norm();
    while (gn * dt > 0.1 * yn) {
      if (0.5 * dt < floor) {
        rec.path().floor_hit = true;
        return rec.finish(PathStatus::kHitZero, t, y);
      }
      dt *= 0.5;
    }
    const bool clamped = t + dt >= target;
    normal_increments(cfg.seed, path_id, rec.path().steps, std::span<double>(z.data(), d));
    const Vec next = y + dt * g + std::sqrt(dt) * z;
    t = clamped ? target : t + dt;
    const double closest = detail::segment_distance_to_origin(y, next);
    y = next;
    rec.advance(t, y);
    if (!all_finite(y)) return rec.finish(PathStatus::kInvalid, t, y);
    rec.radius(closest);
    if (closest <= cfg.eps_zero) return rec.finish(PathStatus::kHitZero, t, y);
    if (cfg.stop_at_outer && y.norm() >= outer) return rec.finish(PathStatus::kEnteredBall, t, y);
  }
  return rec.finish(PathStatus::kCompleted, t, y);
}

/// Dispatch on cfg.scheme. For y_euler_additive the path starts at phi(x0) and
/// its states are Y-coordinates.
inline SdePath simulate_path(const ModelParams& p, const Drift& b, const SchemeConfig& cfg,
                             const Vec& x0, PathId path_id) {
  if (cfg.scheme == Scheme::kYEulerAdditive) {
    return simulate_y_path(TransformContext(p, b), cfg, phi(p, x0), path_id);
  }
  return simulate_x_path(StratonovichModel(p, b), cfg, x0, path_id);
}

//---------------------------------------------------------------------------//
// Deterministic blow-up
//---------------------------------------------------------------------------//

/// T* = |x0|^{1-m} / (kappa (m - 1)) for b(x) = kappa |x|^{m-1} x.
inline double power_blowup_time(double kappa, double m, double x0_norm) {
  return std::pow(x0_norm, 1.0 - m) / (kappa * (m - 1.0));
}

/// |x(t)| = (|x0|^{1-m} - kappa (m-1) t)^{-1/(m-1)} before T*.
inline double power_ode_radius(double kappa, double m, double x0_norm, double t) {
  const double base = std::pow(x0_norm, 1.0 - m) - kappa * (m - 1.0) * t;
  if (!(base > 0.0)) throw std::domain_error("power_ode_radius: t >= T*");
  return std::pow(base, -1.0 / (m - 1.0));
}

struct OdeBlowup {
  SdePath path;
  bool reached = false;     // |x| >= x_max before t_max
  double t_reach = 0.0;     // time of the first step with |x| >= x_max
  double t_star = std::numeric_limits<double>::quiet_NaN();  // analytic, power drift only
};

/// RK4 with dt = dt0 (1 + |x|) / (1 + |b(x)|), stopping at |x| >= x_max.
inline OdeBlowup ode_solve_explosive(const ModelParams& p, const Drift& b, const Vec& x0,
                                     double dt0 = 1e-3, double t_max = 1e3,
                                     std::optional<double> x_max = std::nullopt) {
  SchemeConfig cfg;
  cfg.scheme = Scheme::kOdeAdaptive;
  cfg.dt0 = dt0;
  cfg.t_end = t_max;
  cfg.x_max = x_max.value_or(p.x_max);
  ModelParams quiet = p;
  quiet.noise_scale = 0.0;
  OdeBlowup out;
  out.path = simulate_x_path(StratonovichModel(quiet, b), cfg, x0, 0);
  out.reached = out.path.status == PathStatus::kExploded;
  out.t_reach = out.path.stop_time;
  if (b.kind() == Drift::Kind::kPower) {
    out.t_star = power_blowup_time(b.kappa(), b.growth_exponent(), x0.norm());
  }
  return out;
}

}  // namespace noisereg
