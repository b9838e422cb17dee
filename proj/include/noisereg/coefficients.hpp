// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noisereg/rng.hpp"
#include "noisereg/types.hpp"

namespace noisereg {

//---------------------------------------------------------------------------//
// Model parameters
//---------------------------------------------------------------------------//
struct ModelParams {
  int d = 2;
  double m = 2.0;             // drift growth exponent
  double eta = 1.0;           // noise exponent
  double c_growth = 1.0;      // C in |b(x)| <= C (1 + |x|^m)
  double kappa = 1.0;         // amplitude of the built-in power drift
  double r_switch = 1.0;      // R: outer formula for sigma holds on |x| >= R
  double lambda_floor = 1.0;  // target ellipticity on B_R; sigma(0) = sqrt(lambda) I
  double x_max = 1e8;         // explosion detection radius
  double eps_zero = 1e-4;     // zero-hit radius for the transformed process
  double noise_scale = 1.0;   // multiplies sigma; 0 switches the noise off

  /// Radius of the transformed switch sphere, R^{-eta}.
  [[nodiscard]] double r_y() const { return std::pow(r_switch, -eta); }
};

struct Violation {
  std::string key;      // config key, e.g. "model.eta"
  std::string message;  // the violated inequality
};

struct ValidationReport {
  std::vector<Violation> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// Checks the admissible parameter set (strict inequalities throughout).
/// `allow_d1` admits d = 1 for the counterexample runs.
inline ValidationReport validate_params(const ModelParams& p, bool allow_d1 = false) {
  ValidationReport report;
  auto require = [&](bool holds, const char* key, std::string message) {
    if (!holds) report.violations.push_back({key, std::move(message)});
  };
  require(p.d >= (allow_d1 ? 1 : 2), "model.d", "d < 2");
  require(p.d <= kMaxDim, "model.d", "d > " + std::to_string(kMaxDim));
  require(p.m > 1.0, "model.m", "m <= 1");
  require(p.eta > (p.m - 1.0) / 2.0, "model.eta", "eta <= (m-1)/2");
  require(p.c_growth >= 0.0, "model.c_growth", "c_growth < 0");
  require(p.kappa > 0.0, "model.kappa", "kappa <= 0");
  require(p.r_switch > 0.0, "model.r_switch", "r_switch <= 0");
  require(p.lambda_floor > 0.0, "model.lambda_floor", "lambda_floor <= 0");
  require(p.x_max > p.r_switch + 1.0, "model.x_max", "x_max <= r_switch + 1");
  if (p.r_switch > 0.0 && p.eta > 0.0) {
    require(p.eps_zero > 0.0 && p.eps_zero < p.r_y(), "model.eps_zero",
            "eps_zero outside (0, r_switch^-eta)");
  }
  require(p.noise_scale >= 0.0, "model.noise_scale", "noise_scale < 0");
  return report;
}

//---------------------------------------------------------------------------//
// Drift
//---------------------------------------------------------------------------//
class Drift {
 public:
  enum class Kind { kPower, kCustom };
  using Field = std::function<Vec(const Vec&)>;

  /// b(x) = kappa |x|^{m-1} x, certified with |b| <= c_growth (1 + |x|^m).
  static Drift power(double kappa, double m, double c_growth) {
    Drift b;
    b.kind_ = Kind::kPower;
    b.kappa_ = kappa;
    b.m_ = m;
    b.c_growth_ = c_growth;
    return b;
  }

  static Drift power(const ModelParams& p) { return power(p.kappa, p.m, p.c_growth); }

  /// A user drift with a claimed growth certificate (m, C). The claim is
  /// spot-checked by audit_growth, never trusted silently.
  static Drift custom(Field field, double m, double c_growth) {
    Drift b;
    b.kind_ = Kind::kCustom;
    b.field_ = std::move(field);
    b.m_ = m;
    b.c_growth_ = c_growth;
    return b;
  }

  static Drift zero(double m = 2.0) {
    return custom([](const Vec& x) { return Vec::Zero(x.size()).eval(); }, m, 0.0);
  }

  [[nodiscard]] Vec operator()(const Vec& x) const {
    if (kind_ == Kind::kPower) {
      const double r = x.norm();
      if (r == 0.0) return Vec::Zero(x.size());
      return (kappa_ * std::pow(r, m_ - 1.0)) * x;
    }
    return field_(x);
  }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] double growth_exponent() const { return m_; }
  [[nodiscard]] double growth_constant() const { return c_growth_; }

  /// Same drift with amplitude multiplied by `factor`.
  [[nodiscard]] Drift scaled(double factor) const {
    if (kind_ == Kind::kPower) return power(kappa_ * factor, m_, c_growth_ * factor);
    auto f = field_;
    return custom([f, factor](const Vec& x) { return (factor * f(x)).eval(); }, m_,
                  c_growth_ * factor);
  }

 private:
  Kind kind_ = Kind::kPower;
  Field field_;
  double kappa_ = 1.0;
  double m_ = 2.0;
  double c_growth_ = 1.0;
};

struct GrowthAudit {
  double worst_ratio = 0.0;  // max of |b(x)| / (C (1 + |x|^m)) over the sample
  double worst_radius = 0.0;
  [[nodiscard]] bool ok() const { return worst_ratio <= 1.0 + 1e-12; }
};

/// Spot-check of the growth certificate on `n_radii` log-spaced radii in
/// [1e-3, 1e6], one pseudo-random direction per radius.
inline GrowthAudit audit_growth(const Drift& b, int d, int n_radii = 1000,
                                Seed seed = 0x6a09e667f3bcc908ull) {
  GrowthAudit audit;
  const double c = b.growth_constant();
  const double m = b.growth_exponent();
  for (int i = 0; i < n_radii; ++i) {
    const double r = std::pow(10.0, -3.0 + 9.0 * i / std::max(1, n_radii - 1));
    Vec dir = normal_vector(seed, 0, static_cast<std::uint64_t>(i), d);
    const Vec x = (r / dir.norm()) * dir;
    const double bound = c * (1.0 + std::pow(r, m));
    const double bn = b(x).norm();
    const double ratio = bound > 0.0 ? bn / bound
                                     : (bn > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (ratio > audit.worst_ratio) {
      audit.worst_ratio = ratio;
      audit.worst_radius = r;
    }
  }
  return audit;
}

//---------------------------------------------------------------------------//
// Diffusion coefficient
//
// sigma(x) = f(|x|) I + h(|x|) x x^T / |x|^2. Outside B_R the profiles give
// |x|^{eta+1} (I - (1 + 1/eta) x x^T/|x|^2); inside B_{R/2} sigma = sqrt(lambda) I;
// the shell in between blends both with the quintic smoothstep.
//---------------------------------------------------------------------------//
struct RadialProfile {
  double f;  // tangential eigenvalue
  double h;  // radial correction; radial eigenvalue is f + h
};

inline RadialProfile sigma_profile(const ModelParams& p, double r) {
  const double R = p.r_switch;
  const double inner = std::sqrt(p.lambda_floor);
  if (r >= R) {
    const double f = std::pow(r, p.eta + 1.0);
    return {f, -(1.0 + 1.0 / p.eta) * f};
  }
  if (r <= 0.5 * R) return {inner, 0.0};
  const double s = smoothstep5((r - 0.5 * R) / (0.5 * R)).value;
  const double outer = std::pow(r, p.eta + 1.0);
  return {(1.0 - s) * inner + s * outer, -s * (1.0 + 1.0 / p.eta) * outer};
}

inline Mat sigma(const ModelParams& p, const Vec& x) {
  const int d = static_cast<int>(x.size());
  const double r = x.norm();
  const auto [f, h] = sigma_profile(p, r);
  Mat s = (p.noise_scale * f) * identity(d);
  if (h != 0.0 && r > 0.0) s.noalias() += (p.noise_scale * h / (r * r)) * (x * x.transpose());
  return s;
}

/// Inverse of sigma on the outer region:
/// |x|^{-eta-1} (I - (eta + 1) x x^T/|x|^2), divided by the noise scale.
inline Mat sigma_inverse(const ModelParams& p, const Vec& x) {
  const double r = x.norm();
  if (!(r >= p.r_switch)) throw std::domain_error("sigma_inverse: |x| < r_switch");
  if (p.noise_scale == 0.0) throw std::domain_error("sigma_inverse: noise switched off");
  const int d = static_cast<int>(x.size());
  const double scale = std::pow(r, -p.eta - 1.0) / p.noise_scale;
  return scale * (identity(d) - ((p.eta + 1.0) / (r * r)) * (x * x.transpose()));
}

/// a(x) = sigma(x) sigma(x)^T as a literal product.
inline Mat diffusion_matrix(const ModelParams& p, const Vec& x) {
  const Mat s = sigma(p, x);
  return s * s.transpose();
}

/// Closed form on |x| >= R: |x|^{2 eta + 2} (I + (-1 + 1/eta^2) x x^T/|x|^2).
inline Mat diffusion_matrix_closed(const ModelParams& p, const Vec& x) {
  const double r = x.norm();
  if (!(r >= p.r_switch)) throw std::domain_error("diffusion_matrix_closed: |x| < r_switch");
  const int d = static_cast<int>(x.size());
  const double scale = p.noise_scale * p.noise_scale * std::pow(r, 2.0 * p.eta + 2.0);
  const double k = -1.0 + 1.0 / (p.eta * p.eta);
  return scale * (identity(d) + (k / (r * r)) * (x * x.transpose()));
}

/// Stratonovich-to-Ito correction 1/2 sum_{jk} (d_k sigma_ij) sigma_kj with
/// central differences, step 1e-5 max(1, |x|).
inline Vec ito_correction_numeric(const ModelParams& p, const Vec& x) {
  const int d = static_cast<int>(x.size());
  const double h = 1e-5 * std::max(1.0, x.norm());
  const Mat s = sigma(p, x);
  Vec corr = Vec::Zero(d);
  for (int k = 0; k < d; ++k) {
    Vec xp = x;
    Vec xm = x;
    xp[k] += h;
    xm[k] -= h;
    const Mat ds = (sigma(p, xp) - sigma(p, xm)) / (2.0 * h);
    // sum_j ds_ij * s_kj  ==  (ds * s.row(k)^T)_i
    corr.noalias() += ds * s.row(k).transpose();
  }
  return 0.5 * corr;
}

/// Closed-form correction on |x| >= R:
/// -1/2 (1 + 1/eta)(d - 1 - 1/eta) |x|^{2 eta} x.
inline Vec ito_correction_closed(const ModelParams& p, const Vec& x) {
  const int d = static_cast<int>(x.size());
  const double coef = -0.5 * p.noise_scale * p.noise_scale * (1.0 + 1.0 / p.eta) *
                      (d - 1.0 - 1.0 / p.eta) * std::pow(x.norm(), 2.0 * p.eta);
  return coef * x;
}

/// Ito-form drift b~ = b + correction (closed form outside B_R, numeric inside).
inline Vec ito_drift(const ModelParams& p, const Drift& b, const Vec& x) {
  if (x.norm() >= p.r_switch) return b(x) + ito_correction_closed(p, x);
  return b(x) + ito_correction_numeric(p, x);
}

//---------------------------------------------------------------------------//
// Coefficient sets consumed by the integrators
//---------------------------------------------------------------------------//
template <class M>
concept SdeCoefficients = requires(const M& model, const Vec& x) {
  { model.dim() } -> std::convertible_to<int>;
  { model.drift(x) } -> std::convertible_to<Vec>;
  { model.ito_drift(x) } -> std::convertible_to<Vec>;
  { model.sigma(x) } -> std::convertible_to<Mat>;
};

/// dX = b(X) dt + sigma(X) o dW with the coefficients above.
class StratonovichModel {
 public:
  StratonovichModel(ModelParams params, Drift drift)
      : params_(params), drift_(std::move(drift)) {}

  [[nodiscard]] int dim() const { return params_.d; }
  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] const Drift& drift_field() const { return drift_; }

  [[nodiscard]] Vec drift(const Vec& x) const { return drift_(x); }
  [[nodiscard]] Vec ito_drift(const Vec& x) const { return noisereg::ito_drift(params_, drift_, x); }
  [[nodiscard]] Mat sigma(const Vec& x) const { return noisereg::sigma(params_, x); }

 private:
  ModelParams params_;
  Drift drift_;
};

/// Test double: constant diffusion matrix, so Ito and Stratonovich drifts agree.
class ConstantNoiseModel {
 public:
  ConstantNoiseModel(Drift drift, Mat sigma) : drift_(std::move(drift)), sigma_(std::move(sigma)) {}

  [[nodiscard]] int dim() const { return static_cast<int>(sigma_.rows()); }
  [[nodiscard]] Vec drift(const Vec& x) const { return drift_(x); }
  [[nodiscard]] Vec ito_drift(const Vec& x) const { return drift_(x); }
  [[nodiscard]] Mat sigma(const Vec&) const { return sigma_; }

 private:
  Drift drift_;
  Mat sigma_;
};

//---------------------------------------------------------------------------//
// Ellipticity scan on B_radius
//---------------------------------------------------------------------------//
struct EllipticityReport {
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  Vec argmin;
  double lambda = 0.0;
  [[nodiscard]] bool passed() const { return min_eigenvalue >= lambda; }
};

template <SdeCoefficients M>
EllipticityReport ellipticity_scan(const M& model, double radius, double lambda,
                                   int n_samples, Seed seed = 0xbb67ae8584caa73bull) {
  if (n_samples < 1) throw std::invalid_argument("ellipticity_scan: n_samples < 1");
  const int d = model.dim();
  EllipticityReport report;
  report.lambda = lambda;
  report.argmin = Vec::Zero(d);
  Eigen::SelfAdjointEigenSolver<Mat> solver;
  for (int i = 0; i < n_samples; ++i) {
    Vec dir = normal_vector(seed, 0, static_cast<std::uint64_t>(i), d);
    const double r = radius * std::pow(uniform01(seed, 0, static_cast<std::uint64_t>(i)), 1.0 / d);
    const Vec x = (r / dir.norm()) * dir;
    const Mat s = model.sigma(x);
    solver.compute(s * s.transpose(), Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    if (lo < report.min_eigenvalue) {
      report.min_eigenvalue = lo;
      report.argmin = x;
    }
  }
  return report;
}

inline EllipticityReport ellipticity_scan(const ModelParams& p, int n_samples,
                                          Seed seed = 0xbb67ae8584caa73bull) {
  return ellipticity_scan(StratonovichModel(p, Drift::zero(p.m)), p.r_switch, p.lambda_floor,
                          n_samples, seed);
}

}  // namespace noisereg
