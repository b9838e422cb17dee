// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "noisereg/coefficients.hpp"
#include "noisereg/rng.hpp"
#include "noisereg/types.hpp"

namespace noisereg {

// y = phi(x) = |x|^{-eta-1} x maps infinity to 0 and turns the
// multiplicative Stratonovich noise into dW.

inline Vec phi(const ModelParams& p, const Vec& x) {
  const double r = x.norm();
  if (r == 0.0) throw std::domain_error("phi: x = 0");
  return std::pow(r, -p.eta - 1.0) * x;
}

inline Vec phi_inv(const ModelParams& p, const Vec& y) {
  const double r = y.norm();
  if (r == 0.0) throw std::domain_error("phi_inv: y = 0");
  return std::pow(r, -1.0 / p.eta - 1.0) * y;
}

/// Jacobian of phi on |x| >= R; equals sigma(x)^{-1} there.
inline Mat dphi(const ModelParams& p, const Vec& x) {
  const double r = x.norm();
  if (!(r >= p.r_switch)) throw std::domain_error("dphi: |x| < r_switch");
  const int d = static_cast<int>(x.size());
  return std::pow(r, -p.eta - 1.0) *
         (identity(d) - ((p.eta + 1.0) / (r * r)) * (x * x.transpose()));
}

/// Parameters and drift of the image SDE dY = g(Y) dt + dW.
class TransformContext {
 public:
  TransformContext(ModelParams params, Drift drift)
      : params_(params), drift_(std::move(drift)) {}

  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] const Drift& drift_field() const { return drift_; }
  [[nodiscard]] int dim() const { return params_.d; }

  /// R^{-eta}; recomputed from the parameters every time.
  [[nodiscard]] double r_y() const { return params_.r_y(); }

  /// g(y) = |y|^{(eta+1)/eta} (I - (eta+1) y y^T/|y|^2) b(phi^{-1}(y)) for
  /// 0 < |y| < R^{-eta}; zero on the complement of that ball.
  [[nodiscard]] Vec transformed_drift(const Vec& y) const {
    const double r = y.norm();
    if (r == 0.0) throw std::domain_error("transformed_drift: y = 0");
    const int d = static_cast<int>(y.size());
    if (r >= r_y()) return Vec::Zero(d);
    const double eta = params_.eta;
    const Vec bx = drift_(phi_inv(params_, y));
    const Vec yhat = y / r;
    return std::pow(r, (eta + 1.0) / eta) * (bx - (eta + 1.0) * yhat.dot(bx) * yhat);
  }

  // AdditiveNoiseModel interface used by the Y integrator.
  [[nodiscard]] Vec drift(const Vec& y) const { return transformed_drift(y); }
  [[nodiscard]] double outer_radius() const { return r_y(); }

 private:
  ModelParams params_;
  Drift drift_;
};

inline Vec transformed_drift(const TransformContext& ctx, const Vec& y) {
  return ctx.transformed_drift(y);
}

/// Exponent in |g(y)| <= C |y|^{(eta+1-m)/eta}.
inline double g_exponent(const ModelParams& p) { return (p.eta + 1.0 - p.m) / p.eta; }

struct GBoundReport {
  double c_g = 0.0;            // smallest C with |g| <= C |y|^exponent on the sample
  double exponent = 0.0;       // (eta + 1 - m) / eta
  double fitted_exponent = 0.0;  // log-log regression slope of |g| near y = 0
  double c_g_near_zero = 0.0;  // same bound restricted to |y| < 1e-4 R^{-eta}
  [[nodiscard]] bool exponent_above_minus_one() const { return exponent > -1.0; }
};

/// Samples |y| log-uniformly in [1e-8, 1) R^{-eta} with random directions.
inline GBoundReport g_bound_check(const TransformContext& ctx, int n_samples,
                                  Seed seed = 0x3c6ef372fe94f82bull) {
  const int d = ctx.dim();
  GBoundReport rep;
  rep.exponent = g_exponent(ctx.params());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n_fit = 0;
  for (int i = 0; i < n_samples; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    const double t = uniform01(seed, 1, idx);
    const double r = ctx.r_y() * std::pow(10.0, -8.0 * t);
    Vec dir = normal_vector(seed, 1, idx, d);
    const Vec y = (r / dir.norm()) * dir;
    const double gn = ctx.transformed_drift(y).norm();
    const double ratio = gn / std::pow(r, rep.exponent);
    rep.c_g = std::max(rep.c_g, ratio);
    if (r < 1e-4 * ctx.r_y()) {
      rep.c_g_near_zero = std::max(rep.c_g_near_zero, ratio);
      if (gn > 0.0) {
        const double lx = std::log(r), ly = std::log(gn);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n_fit;
      }
    }
  }
  if (n_fit >= 2) {
    const double denom = n_fit * sxx - sx * sx;
    rep.fitted_exponent = denom != 0.0 ? (n_fit * sxy - sx * sy) / denom : 0.0;
  } else {
    rep.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace noisereg
