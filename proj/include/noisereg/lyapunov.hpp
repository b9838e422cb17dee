// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisereg/coefficients.hpp"
#include "noisereg/rng.hpp"
#include "noisereg/types.hpp"

namespace noisereg {

//---------------------------------------------------------------------------//
// V(x) = (log|x|)^alpha for |x| >= r1, the constant a_floor for |x| <= r0 and a
// smoothstep blend in between (C^2 in the radius).
//---------------------------------------------------------------------------//
struct LyapunovProfile {
  double alpha = 0.5;
  double r0 = 2.0;       // inner plateau radius, max(2, R)
  double r1 = 3.0;       // exact-formula radius, r0 + 1
  double a_floor = 0.0;  // 1/2 (log r1)^alpha

  static LyapunovProfile make(double alpha, double r_switch) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    LyapunovProfile prof;
    prof.alpha = alpha;
    prof.r0 = std::max(2.0, r_switch);
    prof.r1 = prof.r0 + 1.0;
    prof.a_floor = 0.5 * std::pow(std::log(prof.r1), alpha);
    return prof;
  }
};

/// V as a function of the radius, with first and second radial derivatives.
struct RadialValue {
  double v;
  double dv;
  double d2v;
};

inline RadialValue lyapunov_radial(const LyapunovProfile& prof, double r) {
  if (r <= prof.r0) return {prof.a_floor, 0.0, 0.0};
  const double a = prof.alpha;
  const double L = std::log(r);
  const double g = std::pow(L, a);
  const double g1 = a * std::pow(L, a - 1.0) / r;
  const double g2 = (a * (a - 1.0) * std::pow(L, a - 2.0) - a * std::pow(L, a - 1.0)) / (r * r);
  if (r >= prof.r1) return {g, g1, g2};
  const double w = prof.r1 - prof.r0;
  const auto s = smoothstep5((r - prof.r0) / w);
  const double gap = g - prof.a_floor;
  return {prof.a_floor + s.value * gap,
          s.d1 / w * gap + s.value * g1,
          s.d2 / (w * w) * gap + 2.0 * s.d1 / w * g1 + s.value * g2};
}

inline double lyapunov_v(const LyapunovProfile& prof, const Vec& x) {
  return lyapunov_radial(prof, x.norm()).v;
}

inline Vec lyapunov_grad(const LyapunovProfile& prof, const Vec& x) {
  const double r = x.norm();
  const auto rv = lyapunov_radial(prof, r);
  if (rv.dv == 0.0) return Vec::Zero(x.size());
  return (rv.dv / r) * x;
}

inline Mat lyapunov_hess(const LyapunovProfile& prof, const Vec& x) {
  const int d = static_cast<int>(x.size());
  const double r = x.norm();
  const auto rv = lyapunov_radial(prof, r);
  if (rv.dv == 0.0 && rv.d2v == 0.0) return Mat::Zero(d, d);
  const Mat proj = (x * x.transpose()) / (r * r);
  return rv.d2v * proj + (rv.dv / r) * (identity(d) - proj);
}

/// Closed form of LV on |x| >= max(r1, R):
/// alpha (log|x|)^{alpha-1} [ b(x).x/|x|^2
///     - 1/2 |x|^{2 eta} ((d-2)/eta + (1-alpha)/(eta^2 log|x|)) ].
inline double lv_closed(const LyapunovProfile& prof, const ModelParams& p, const Drift& b,
                        const Vec& x) {
  const double r = x.norm();
  // Rounding slack: r * unit vector may land one ulp below the threshold.
  if (!(r >= std::max(prof.r1, p.r_switch) * (1.0 - 1e-12))) {
    throw std::domain_error("lv_closed: |x| below the exact-formula radius");
  }
  const double a = prof.alpha;
  const double L = std::log(r);
  const double eta = p.eta;
  const double drift_term = b(x).dot(x) / (r * r);
  const double noise_term = 0.5 * p.noise_scale * p.noise_scale * std::pow(r, 2.0 * eta) *
                            ((p.d - 2.0) / eta + (1.0 - a) / (eta * eta * L));
  return a * std::pow(L, a - 1.0) * (drift_term - noise_term);
}

/// LV = b~ . grad V + 1/2 tr(sigma sigma^T D^2 V), valid everywhere.
inline double lv_generic(const LyapunovProfile& prof, const ModelParams& p, const Drift& b,
                         const Vec& x) {
  const Vec grad = lyapunov_grad(prof, x);
  const Mat hess = lyapunov_hess(prof, x);
  if (grad.isZero(0.0) && hess.isZero(0.0)) return 0.0;
  const Mat a = diffusion_matrix(p, x);
  return ito_drift(p, b, x).dot(grad) + 0.5 * (a.cwiseProduct(hess)).sum();
}

/// Unit vectors used for angular scans: evenly spaced in d = 2, pseudo-random
/// (fixed seed) otherwise.
inline std::vector<Vec> scan_directions(int d, int n, Seed seed = 0xa54ff53a5f1d36f1ull) {
  std::vector<Vec> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Vec u(d);
    if (d == 2) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / n;
      u << std::cos(t), std::sin(t);
    } else {
      u = normal_vector(seed, 7, static_cast<std::uint64_t>(k), d);
      u /= u.norm();
    }
    dirs.push_back(u);
  }
  return dirs;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / std::max(1, n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

//---------------------------------------------------------------------------//
// Negativity radius
//---------------------------------------------------------------------------//
struct NegativityOptions {
  double radius_cap = 1e12;
  int scan_points = 2048;
  int directions = 64;
  int certificate_points = 512;
  double certificate_span = 1e6;  // certificate covers [r*, span r*]
  double rel_tol = 1e-3;
};

struct NegativityResult {
  enum class Status {
    kSignChange,        // LV_closed changes sign at r*
    kNegativeFromStart, // LV_closed < 0 already at max(r1, R)
    kNoNegativity,      // positive somewhere up to the cap: parameters inadmissible
  };
  Status status = Status::kNoNegativity;
  double r_star = std::numeric_limits<double>::quiet_NaN();
  bool certificate_ok = false;
  double certificate_max_lv = std::numeric_limits<double>::quiet_NaN();
  [[nodiscard]] bool found() const { return status != Status::kNoNegativity; }
};

inline const char* to_string(NegativityResult::Status s) {
  switch (s) {
    case NegativityResult::Status::kSignChange: return "sign_change";
    case NegativityResult::Status::kNegativeFromStart: return "negative_from_start";
    case NegativityResult::Status::kNoNegativity: return "no_negativity";
  }
  return "unknown";
}

inline NegativityResult negativity_radius(const LyapunovProfile& prof, const ModelParams& p,
                                          const Drift& b, const NegativityOptions& opt = {}) {
  const auto dirs = scan_directions(p.d, opt.directions);
  auto worst = [&](double r) {
    double w = -std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) w = std::max(w, lv_closed(prof, p, b, (r * u).eval()));
    return w;
  };

  NegativityResult res;
  const double r_lo = std::max(prof.r1, p.r_switch);
  const auto radii = log_grid(r_lo, opt.radius_cap, opt.scan_points);
  int last_nonneg = -1;
  for (int i = 0; i < static_cast<int>(radii.size()); ++i) {
    if (!(worst(radii[static_cast<std::size_t>(i)]) < 0.0)) last_nonneg = i;
  }
  if (last_nonneg == static_cast<int>(radii.size()) - 1) return res;

  if (last_nonneg < 0) {
    res.status = NegativityResult::Status::kNegativeFromStart;
    res.r_star = r_lo;
  } else {
    double lo = radii[static_cast<std::size_t>(last_nonneg)];
    double hi = radii[static_cast<std::size_t>(last_nonneg + 1)];
    while ((hi - lo) > opt.rel_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      (worst(mid) < 0.0 ? hi : lo) = mid;
    }
    res.status = NegativityResult::Status::kSignChange;
    res.r_star = hi;
  }

  res.certificate_max_lv = -std::numeric_limits<double>::infinity();
  for (double r : log_grid(res.r_star, opt.certificate_span * res.r_star, opt.certificate_points)) {
    res.certificate_max_lv = std::max(res.certificate_max_lv, worst(r));
  }
  res.certificate_ok = res.certificate_max_lv < 0.0;
  return res;
}

//---------------------------------------------------------------------------//
// Super-Lyapunov fit: LV <= -c V^gamma + d0
//---------------------------------------------------------------------------//
struct SuperLyapunovFit {
  double gamma = 1.5;
  double c_coef = 0.0;
  double d0 = 0.0;
  double T_horizon = 1.0;
  double k_t = 0.0;
  double r_star = 0.0;
  double fit_radius = 0.0;  // start of the outer fit grid, max(r1, r*)
  int audit_points = 0;
  int audit_violations = 0;
  double audit_worst_margin = 0.0;  // max of LV + c V^gamma - d0 over the audit
  [[nodiscard]] bool audit_passed() const { return audit_violations == 0; }
};

struct SuperFitOptions {
  int outer_radii = 512;
  int directions = 64;
  double outer_max = 1e6;
  int inner_samples = 4096;
  int inner_radial = 1024;
  int audit_samples = 10000;
  Seed inner_seed = 0x510e527fade682d1ull;
  Seed audit_seed = 0x9b05688c2b3e6c1full;
};

/// K_T = max{ (2 d0 / c)^{1/gamma}, (c (gamma - 1) T / 2)^{-1/(gamma - 1)} }.
inline double k_threshold(double c, double gamma, double d0, double T) {
  if (!(c > 0.0) || !(gamma > 1.0) || !(T > 0.0) || d0 < 0.0) {
    throw std::invalid_argument("k_threshold: need c > 0, gamma > 1, T > 0, d0 >= 0");
  }
  const double first = std::pow(2.0 * d0 / c, 1.0 / gamma);
  const double second = std::pow(c * (gamma - 1.0) * T / 2.0, -1.0 / (gamma - 1.0));
  return std::max(first, second);
}

inline double k_threshold(const SuperLyapunovFit& fit) {
  return k_threshold(fit.c_coef, fit.gamma, fit.d0, fit.T_horizon);
}

inline SuperLyapunovFit super_lyapunov_fit(const LyapunovProfile& prof, const ModelParams& p,
                                           const Drift& b, double gamma, double T_horizon = 1.0,
                                           const SuperFitOptions& opt = {}) {
  if (!(gamma > 1.0)) throw std::invalid_argument("super_lyapunov_fit: gamma must exceed 1");
  const auto neg = negativity_radius(prof, p, b);
  if (!neg.found()) throw std::runtime_error("super_lyapunov_fit: LV never becomes negative");

  SuperLyapunovFit fit;
  fit.gamma = gamma;
  fit.T_horizon = T_horizon;
  fit.r_star = neg.r_star;
  fit.fit_radius = std::max(prof.r1, neg.r_star);

  const auto dirs = scan_directions(p.d, opt.directions);
  double inf_q = std::numeric_limits<double>::infinity();
  for (double r : log_grid(fit.fit_radius, std::max(opt.outer_max, 2.0 * fit.fit_radius),
                           opt.outer_radii)) {
    for (const auto& u : dirs) {
      const Vec x = r * u;
      inf_q = std::min(inf_q, -lv_closed(prof, p, b, x) / std::pow(lyapunov_v(prof, x), gamma));
    }
  }
  if (!(inf_q > 0.0)) throw std::runtime_error("super_lyapunov_fit: infimum of -LV/V^gamma <= 0");
  fit.c_coef = 0.5 * inf_q;

  auto excess = [&](const Vec& x) {
    return lv_generic(prof, p, b, x) + fit.c_coef * std::pow(lyapunov_v(prof, x), gamma);
  };

  // Inner supremum: random points plus a radial sweep, then a golden-section
  // refinement around the best radial point.
  const double r_out = fit.fit_radius;
  double sup = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < opt.inner_samples; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    Vec u = normal_vector(opt.inner_seed, 0, idx, p.d);
    const Vec x = (r_out * uniform01(opt.inner_seed, 0, idx) / u.norm()) * u;
    sup = std::max(sup, excess(x));
  }
  Vec best_dir = dirs.front();
  double best_r = 0.0;
  const double dr = r_out / opt.inner_radial;
  for (int i = 0; i <= opt.inner_radial; ++i) {
    const double r = dr * i;
    for (const auto& u : dirs) {
      const double e = excess((r * u).eval());
      if (e > sup) {
        sup = e;
        best_r = r;
        best_dir = u;
      }
    }
  }
  {
    double lo = std::max(0.0, best_r - dr), hi = std::min(r_out, best_r + dr);
    const double phi_ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
      const double a = hi - phi_ratio * (hi - lo);
      const double c = lo + phi_ratio * (hi - lo);
      if (excess((a * best_dir).eval()) > excess((c * best_dir).eval())) hi = c; else lo = a;
    }
    sup = std::max(sup, excess((0.5 * (lo + hi) * best_dir).eval()));
  }
  fit.d0 = std::max(0.0, sup);
  fit.k_t = k_threshold(fit);

  // Fresh audit: half log-uniform radii in [1e-3, outer_max], half uniform in [0, 2 r_out].
  fit.audit_points = opt.audit_samples;
  fit.audit_worst_margin = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < opt.audit_samples; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    const double t = uniform01(opt.audit_seed, 0, idx);
    const double r = (i % 2 == 0) ? std::pow(10.0, -3.0 + t * (std::log10(opt.outer_max) + 3.0))
                                  : 2.0 * r_out * t;
    Vec u = normal_vector(opt.audit_seed, 0, idx, p.d);
    const Vec x = (r / u.norm()) * u;
    const double margin = excess(x) - fit.d0;
    fit.audit_worst_margin = std::max(fit.audit_worst_margin, margin);
    if (margin > 0.0) ++fit.audit_violations;
  }
  return fit;
}

}  // namespace noisereg
