// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace noisereg {

// Largest state dimension supported without heap allocation in the hot loops.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

using PathId = std::uint64_t;
using Seed = std::uint64_t;

inline Vec zeros(int d) { return Vec::Zero(d); }
inline Mat identity(int d) { return Mat::Identity(d, d); }

/// Quintic smoothstep 6u^5 - 15u^4 + 10u^3 on [0, 1], clamped outside.
/// First and second derivatives vanish at both ends.
struct Smoothstep {
  double value;
  double d1;
  double d2;
};

inline Smoothstep smoothstep5(double u) {
  if (u <= 0.0) return {0.0, 0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0, 0.0};
  const double u2 = u * u;
  const double u3 = u2 * u;
  return {u3 * (10.0 + u * (-15.0 + 6.0 * u)),
          30.0 * u2 * (1.0 - u) * (1.0 - u),
          60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)};
}

inline double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

inline bool all_finite(const Vec& x) { return x.allFinite(); }

}  // namespace noisereg
