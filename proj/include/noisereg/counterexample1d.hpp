// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "noisereg/parallel.hpp"
#include "noisereg/quadrature.hpp"
#include "noisereg/rng.hpp"
#include "noisereg/statistics.hpp"

namespace noisereg {

//---------------------------------------------------------------------------//
// Scalar model dX = b(X) dt + sigma(X) o dW
//---------------------------------------------------------------------------//
struct ScalarModel {
  std::function<double(double)> b;
  std::function<double(double)> sigma;
  double x0 = 0.0;
  Tolerances tol;
  ImproperOptions improper;

  /// b = sigma = 1 + z^2: the explosive example with finite phi(infinity).
  static ScalarModel tangent() {
    ScalarModel m;
    m.b = [](double z) { return 1.0 + z * z; };
    m.sigma = m.b;
    return m;
  }

  /// sigma = 1, b = 1 + z^2: phi(infinity) is infinite, the Feller branch.
  static ScalarModel feller() {
    ScalarModel m;
    m.b = [](double z) { return 1.0 + z * z; };
    m.sigma = [](double) { return 1.0; };
    return m;
  }
};

struct PositivityAudit {
  bool ok = true;
  double worst_point = std::numeric_limits<double>::quiet_NaN();
  double min_b = std::numeric_limits<double>::infinity();
  double min_sigma = std::numeric_limits<double>::infinity();
};

inline PositivityAudit audit_positivity(const ScalarModel& m, double lo = -1e3, double hi = 1e3,
                                        int n = 20001) {
  PositivityAudit a;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    const double bv = m.b(x), sv = m.sigma(x);
    a.min_b = std::min(a.min_b, bv);
    a.min_sigma = std::min(a.min_sigma, sv);
    if (!(bv > 0.0) || !(sv > 0.0)) {
      if (a.ok) a.worst_point = x;
      a.ok = false;
    }
  }
  return a;
}

/// B(x) = int_0^x dz / b(z).
inline double b_antiderivative(const ScalarModel& m, double x) {
  return integrate_from_origin([&](double z) { return 1.0 / m.b(z); }, x, m.tol);
}

/// int_0^infinity dz / b(z) with the cap-doubling verdict.
inline ImproperResult explosion_criterion(const ScalarModel& m) {
  return improper_integral([&](double z) { return 1.0 / m.b(z); }, 0.0, m.improper);
}

/// int_{-infinity}^0 dz / b(z).
inline ImproperResult explosion_criterion_lower(const ScalarModel& m) {
  return improper_integral([&](double z) { return 1.0 / m.b(-z); }, 0.0, m.improper);
}

/// phi(x) = int_0^x dz / sigma(z).
inline double phi_1d(const ScalarModel& m, double x) {
  return integrate_from_origin([&](double z) { return 1.0 / m.sigma(z); }, x, m.tol);
}

inline ImproperResult phi_limit(const ScalarModel& m) {
  return improper_integral([&](double z) { return 1.0 / m.sigma(z); }, 0.0, m.improper);
}

/// |phi(-infinity)|.
inline ImproperResult phi_limit_lower(const ScalarModel& m) {
  return improper_integral([&](double z) { return 1.0 / m.sigma(-z); }, 0.0, m.improper);
}

namespace detail {

/// Solves F(x) = target for increasing F, expanding a bracket from `start`.
template <class F>
double invert_increasing(const F& fn, double target, double start, double rel_tol = 1e-12,
                         double first_step = 0.0) {
  double lo = start, hi = start;
  double flo = fn(lo), fhi = flo;
  if (flo == target) return start;
  double step = first_step > 0.0 ? first_step : std::max(1.0, std::abs(start));
  int expansions = 0;
  if (flo < target) {
    while (fhi < target) {
      lo = hi;
      flo = fhi;
      hi += step;
      step *= 2.0;
      fhi = fn(hi);
      if (++expansions > 1100 || !std::isfinite(hi)) throw std::domain_error("inverse: no bracket");
    }
  } else {
    while (flo > target) {
      hi = lo;
      fhi = flo;
      lo -= step;
      step *= 2.0;
      flo = fn(lo);
      if (++expansions > 1100 || !std::isfinite(lo)) throw std::domain_error("inverse: no bracket");
    }
  }
  if (fhi == target) return hi;
  if (flo == target) return lo;
  std::uintmax_t iters = 200;
  const auto tol = [rel_tol](double a, double b) {
    return std::abs(b - a) <= rel_tol * std::max(1.0, std::min(std::abs(a), std::abs(b)));
  };
  const auto r = boost::math::tools::toms748_solve([&](double x) { return fn(x) - target; }, lo, hi,
                                                   flo - target, fhi - target, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace detail

/// Blow-up time B(infinity) - B(x0), +infinity if the criterion integral diverges.
inline double explosion_time_1d(const ScalarModel& m) {
  const auto crit = explosion_criterion(m);
  if (!crit.finite()) return std::numeric_limits<double>::infinity();
  return crit.value - b_antiderivative(m, m.x0);
}

/// x(t) = B^{-1}(B(x0) + t), defined for t below the blow-up time.
inline double ode_solution_1d(const ScalarModel& m, double t) {
  const double target = b_antiderivative(m, m.x0) + t;
  const auto crit = explosion_criterion(m);
  if (crit.finite() && target >= crit.value) throw std::domain_error("ode_solution_1d: t >= T*");
  return detail::invert_increasing([&](double x) { return b_antiderivative(m, x); }, target, m.x0,
                                   1e-13);
}

/// phi^{-1}(y), y inside (phi(-infinity), phi(infinity)).
inline double phi_inverse(const ScalarModel& m, double y) {
  const auto up = phi_limit(m);
  const auto down = phi_limit_lower(m);
  if ((up.finite() && y >= up.value) || (down.finite() && y <= -down.value)) {
    throw std::domain_error("phi_inverse: y outside the image of phi");
  }
  return detail::invert_increasing([&](double x) { return phi_1d(m, x); }, y, 0.0);
}

/// A(y) = b(phi^{-1}(y)) / sigma(phi^{-1}(y)).
inline double a_drift(const ScalarModel& m, double y) {
  const double x = phi_inverse(m, y);
  return m.b(x) / m.sigma(x);
}

//---------------------------------------------------------------------------//
// Piecewise-cubic Hermite interpolant on a sorted grid, with exact integrals
// of the interpolant. Slopes come from three-point differences, which are
// exact for quadratics.
//---------------------------------------------------------------------------//
class CubicTable {
 public:
  CubicTable() = default;
  CubicTable(std::vector<double> nodes, std::vector<double> values)
      : x_(std::move(nodes)), y_(std::move(values)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw std::invalid_argument("CubicTable: need >= 3 nodes");
    m_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
      // Derivative at x_i of the quadratic through nodes a, a+1, a+2.
      const double x0 = x_[a], x1 = x_[a + 1], x2 = x_[a + 2], xi = x_[i];
      m_[i] = y_[a] * ((xi - x1) + (xi - x2)) / ((x0 - x1) * (x0 - x2)) +
              y_[a + 1] * ((xi - x0) + (xi - x2)) / ((x1 - x0) * (x1 - x2)) +
              y_[a + 2] * ((xi - x0) + (xi - x1)) / ((x2 - x0) * (x2 - x1));
    }
    prefix_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      const double h = x_[i] - x_[i - 1];
      prefix_[i] = prefix_[i - 1] + 0.5 * h * (y_[i - 1] + y_[i]) + h * h / 12.0 * (m_[i - 1] - m_[i]);
    }
  }

  [[nodiscard]] double lo() const { return x_.front(); }
  [[nodiscard]] double hi() const { return x_.back(); }
  [[nodiscard]] bool covers(double x) const { return x >= lo() && x <= hi(); }

  [[nodiscard]] double operator()(double x) const {
    const std::size_t i = cell(x);
    return eval(i, x);
  }

  /// Integral of the interpolant over [a, b] within the table.
  [[nodiscard]] double integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    const std::size_t ia = cell(a), ib = cell(b);
    if (ia == ib) return gauss3(ia, a, b);
    double s = gauss3(ia, a, x_[ia + 1]);
    s += prefix_[ib] - prefix_[ia + 1];
    s += gauss3(ib, x_[ib], b);
    return s;
  }

  /// Integral over [a, a + len], len >= 0. Short spans are walked cell by cell
  /// with exact lengths, so the result does not inherit the rounding of a + len.
  [[nodiscard]] double integral_span(double a, double len) const {
    if (len < 0.0) throw std::invalid_argument("CubicTable: negative span");
    if (len > 1e-3 * (1.0 + std::abs(a))) return integral(a, a + len);
    std::size_t i = cell(a);
    double pos = a, rem = len, s = 0.0;
    while (true) {
      const double room = x_[i + 1] - pos;
      if (rem <= room || i + 2 >= x_.size()) {
        if (rem > room && pos + rem > hi()) throw std::domain_error("CubicTable: outside the grid");
        s += gauss3_len(i, pos, rem);
        return s;
      }
      s += gauss3_len(i, pos, room);
      rem -= room;
      pos = x_[++i];
    }
  }

 private:
  [[nodiscard]] std::size_t cell(double x) const {
    if (!covers(x)) throw std::domain_error("CubicTable: outside the grid");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  [[nodiscard]] double eval(std::size_t i, double x) const {
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * m_[i + 1];
  }

  // Three-point Gauss-Legendre, exact for the cubic on one cell.
  [[nodiscard]] double gauss3(std::size_t i, double a, double b) const {
    static constexpr double kNode = 0.7745966692414834;
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    return r * (5.0 / 9.0 * eval(i, c - r * kNode) + 8.0 / 9.0 * eval(i, c) +
                5.0 / 9.0 * eval(i, c + r * kNode));
  }

  [[nodiscard]] double gauss3_len(std::size_t i, double start, double len) const {
    static constexpr double kNode = 0.7745966692414834;
    const double r = 0.5 * len, c = start + r;
    return r * (5.0 / 9.0 * eval(i, c - r * kNode) + 8.0 / 9.0 * eval(i, c) +
                5.0 / 9.0 * eval(i, c + r * kNode));
  }

  std::vector<double> x_, y_, m_, prefix_;
};

/// Nodes uniform in asinh between lo and hi.
inline std::vector<double> asinh_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::asinh(lo), b = std::asinh(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::sinh(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// A on sorted nodes, warm-starting each inversion of phi at the previous node.
inline std::vector<double> a_drift_on_grid(const ScalarModel& m, const std::vector<double>& ys) {
  std::vector<double> out;
  out.reserve(ys.size());
  double x = phi_inverse(m, ys.front());
  double y = ys.front();
  for (double target : ys) {
    if (target != y) {
      const double guess = std::abs(target - y) * m.sigma(x);
      const double first = std::clamp(1.5 * guess, 1e-12 * std::max(1.0, std::abs(x)), std::max(1.0, std::abs(x)));
      x = detail::invert_increasing([&](double xx) { return phi_1d(m, xx); }, target, x, 1e-12, first);
      y = target;
    }
    out.push_back(m.b(x) / m.sigma(x));
  }
  return out;
}

//---------------------------------------------------------------------------//
// Feller double integral
//---------------------------------------------------------------------------//
struct FellerOptions {
  double table_max = 1e5;  // A is tabulated on [0, table_max]
  int table_nodes = 8193;
  ImproperOptions outer;
  ImproperOptions inner;
};

struct FellerResult {
  ImproperResult feller;      // 2 int_0^inf int_0^inf exp(-2 int_y^{y+z} A) dz dy
  ImproperResult comparison;  // int_0^inf 1/A
  bool inequality_holds = false;  // feller <= comparison (+ slack) when both finite
  double slack = 1e-6;
};

/// Same double integral for an explicit drift A given with its antiderivative
/// increment I(y, z) = int_y^{y+z} A (test doubles with closed forms).
template <class AFn, class IFn>
ImproperResult feller_integral_explicit(const AFn& a_of, const IFn& a_int,
                                        const FellerOptions& opt = {}) {
  auto inner = [&](double y) {
    ImproperOptions io = opt.inner;
    io.first_cap = 1.0 / (1.0 + a_of(y));
    const auto r = improper_integral([&](double z) { return std::exp(-2.0 * a_int(y, z)); }, 0.0, io);
    if (!r.finite()) throw QuadratureError("inner Feller integral not finite", y, y);
    return r.value;
  };
  return improper_integral([&](double y) { return 2.0 * inner(y); }, 0.0, opt.outer);
}

/// Branch phi(infinity) = infinity only.
inline FellerResult feller_integral(const ScalarModel& m, const FellerOptions& opt = {}) {
  if (phi_limit(m).finite()) {
    throw std::invalid_argument("feller_integral: phi(infinity) is finite, use the direct branch");
  }
  const auto nodes = asinh_grid(0.0, opt.table_max, opt.table_nodes);
  const CubicTable table(nodes, a_drift_on_grid(m, nodes));
  auto a_of = [&](double u) { return table.covers(u) ? table(u) : a_drift(m, u); };
  auto a_int = [&](double y, double z) {
    if (table.covers(y + z)) return table.integral_span(y, z);
    return integrate_or_throw(a_of, y, y + z, m.tol);
  };
  FellerResult res;
  res.feller = feller_integral_explicit(a_of, a_int, opt);
  res.comparison = improper_integral([&](double y) { return 1.0 / a_of(y); }, 0.0, opt.outer);
  res.inequality_holds = !res.feller.finite() || !res.comparison.finite() ||
                         res.feller.value <= res.comparison.value + res.slack;
  return res;
}


//---------------------------------------------------------------------------//
// Monte Carlo for dY = A(Y) dt + dW
//---------------------------------------------------------------------------//
struct Mc1dConfig {
  std::size_t n_paths = 2000;
  double dt = 1e-4;
  std::vector<double> checkpoints{0.5, 10.0};
  double level_L = 1e3;       // proxy level when phi(infinity) is infinite
  double finite_eps = 1e-8;   // explosion at phi(infinity) - eps
  int table_nodes = 8193;
  int threads = 1;
  Seed seed = 3;
};

struct Mc1dResult {
  bool finite_branch = false;
  double y0 = 0.0;
  double upper = 0.0;       // explosion level (phi(inf) - eps, or L)
  double lower = 0.0;       // phi(-inf) + eps, or -L
  double upper_far = 0.0;   // 10 L in the infinite branch, else upper
  double lower_far = 0.0;
  std::vector<double> checkpoints;
  std::vector<double> fraction;        // either boundary reached by t_k
  std::vector<double> fraction_upper;  // upper boundary only
  std::vector<double> fraction_far;    // far levels (sensitivity to L)
  std::vector<Interval> ci;
  std::size_t n_paths = 0;

  [[nodiscard]] bool nondecreasing() const {
    for (std::size_t k = 1; k < fraction.size(); ++k) {
      if (fraction[k] < fraction[k - 1]) return false;
    }
    return true;
  }
};

struct ScalarHit {
  double t_exit = std::numeric_limits<double>::infinity();  // first exit from (lower, upper)
  bool upper = false;
  double t_far = std::numeric_limits<double>::infinity();   // first exit from (lower_far, upper_far)
};

/// Euler path of dY = A(Y) dt + dW until it leaves (lower_far, upper_far) or t_end.
template <class AFn>
ScalarHit simulate_scalar_y(const AFn& a, double y0, double lower, double upper, double lower_far,
                            double upper_far, double dt, double t_end, Seed seed, PathId id) {
  ScalarHit hit;
  double y = y0, t = 0.0;
  for (std::uint64_t step = 0; t < t_end; ++step) {
    const double h = std::min(dt, t_end - t);
    double z = 0.0;
    normal_increments(seed, id, step, std::span<double>(&z, 1));
    y += h * a(y) + std::sqrt(h) * z;
    const double next = static_cast<double>(step + 1) * dt;
    t = next >= t_end ? t_end : next;
    if (!std::isfinite(y)) y = std::numeric_limits<double>::infinity();  // overflow is past every level
    if (std::isinf(hit.t_exit) && (y >= upper || y <= lower)) {
      hit.t_exit = t;
      hit.upper = y >= upper;
    }
    if (y >= upper_far || y <= lower_far) {
      hit.t_far = t;
      break;
    }
  }
  return hit;
}

template <class AFn>
Mc1dResult explosion_mc_y(const AFn& a, double y0, double lower, double upper, double lower_far,
                          double upper_far, const Mc1dConfig& cfg) {
  if (cfg.checkpoints.empty()) throw std::invalid_argument("explosion_mc_1d: no checkpoints");
  const double t_end = *std::max_element(cfg.checkpoints.begin(), cfg.checkpoints.end());
  std::vector<ScalarHit> hits(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    hits[i] = simulate_scalar_y(a, y0, lower, upper, lower_far, upper_far, cfg.dt, t_end, cfg.seed,
                                static_cast<PathId>(i));
  });
  Mc1dResult res;
  res.y0 = y0;
  res.upper = upper;
  res.lower = lower;
  res.upper_far = upper_far;
  res.lower_far = lower_far;
  res.checkpoints = cfg.checkpoints;
  res.n_paths = cfg.n_paths;
  for (double t : cfg.checkpoints) {
    std::size_t k = 0, ku = 0, kf = 0;
    for (const auto& h : hits) {
      if (h.t_exit <= t) {
        ++k;
        if (h.upper) ++ku;
      }
      if (h.t_far <= t) ++kf;
    }
    const double n = static_cast<double>(cfg.n_paths);
    res.fraction.push_back(static_cast<double>(k) / n);
    res.fraction_upper.push_back(static_cast<double>(ku) / n);
    res.fraction_far.push_back(static_cast<double>(kf) / n);
    res.ci.push_back(wilson_interval(k, cfg.n_paths));
  }
  return res;
}

/// Y = phi(X) from phi(x0). Explosion means Y reaching phi(+-infinity) -+ eps
/// (finite branch) or +-L (infinite branch, with 10 L reported alongside).
inline Mc1dResult explosion_mc_1d(const ScalarModel& m, const Mc1dConfig& cfg) {
  const auto up = phi_limit(m);
  const auto down = phi_limit_lower(m);
  const double y0 = phi_1d(m, m.x0);
  const double t_end = *std::max_element(cfg.checkpoints.begin(), cfg.checkpoints.end());
  const double upper = up.finite() ? up.value - cfg.finite_eps : cfg.level_L;
  const double lower = down.finite() ? -down.value + cfg.finite_eps : -cfg.level_L;
  const double upper_far = up.finite() ? upper : 10.0 * cfg.level_L;
  const double lower_far = down.finite() ? lower : -10.0 * cfg.level_L;
  const double reach = 10.0 * std::sqrt(t_end) + 10.0;
  const double t_lo = std::max(lower_far, y0 - reach);
  const double t_hi = upper_far;
  const CubicTable table(asinh_grid(t_lo, t_hi, cfg.table_nodes),
                         a_drift_on_grid(m, asinh_grid(t_lo, t_hi, cfg.table_nodes)));
  auto a = [&](double y) { return table(std::clamp(y, table.lo(), table.hi())); };
  auto res = explosion_mc_y(a, y0, lower, upper, lower_far, upper_far, cfg);
  res.finite_branch = up.finite();
  return res;
}

}  // namespace noisereg
