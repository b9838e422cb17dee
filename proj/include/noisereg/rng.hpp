// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "noisereg/types.hpp"

namespace noisereg {

//---------------------------------------------------------------------------//
// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The output is a pure function of (counter, key): every draw used by the
// simulators is addressed by (seed, path_id, step_index, block), so results
// do not depend on thread count or scheduling.
//---------------------------------------------------------------------------//
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Independent sub-streams of one (seed, path) pair.
enum class Stream : std::uint32_t {
  kGaussian = 0,
  kAuxiliary = 1,
};

namespace detail {

inline Philox4x32::Key make_key(Seed seed, PathId path_id) noexcept {
  // High path-id bits are folded into the key so 64-bit ids stay distinct.
  const auto path_hi = static_cast<std::uint32_t>(path_id >> 32);
  return {static_cast<std::uint32_t>(seed),
          static_cast<std::uint32_t>(seed >> 32) ^ (path_hi * 0x85EBCA6Bu)};
}

inline Philox4x32::Counter make_counter(Stream stream, std::uint32_t block,
                                        PathId path_id,
                                        std::uint64_t step_index) noexcept {
  return {block | (static_cast<std::uint32_t>(stream) << 24),
          static_cast<std::uint32_t>(step_index),
          static_cast<std::uint32_t>(step_index >> 32),
          static_cast<std::uint32_t>(path_id)};
}

// Open interval (0, 1) with 53 random bits.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Fill `out` with standard normal draws determined by
/// (seed, path_id, step_index). Box-Muller, two normals per Philox block.
inline void normal_increments(Seed seed, PathId path_id, std::uint64_t step_index,
                              std::span<double> out) noexcept {
  const auto key = detail::make_key(seed, path_id);
  std::uint32_t block = 0;
  for (std::size_t i = 0; i < out.size(); i += 2, ++block) {
    const auto r = Philox4x32::apply(
        detail::make_counter(Stream::kGaussian, block, path_id, step_index), key);
    const double u1 = detail::to_unit(r[0], r[1]);
    const double u2 = detail::to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i] = radius * std::cos(angle);
    if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
  }
}

inline Vec normal_vector(Seed seed, PathId path_id, std::uint64_t step_index, int d) {
  Vec z(d);
  normal_increments(seed, path_id, step_index, std::span<double>(z.data(), d));
  return z;
}

/// Uniform on (0, 1), from a stream disjoint from the Gaussian one.
inline double uniform01(Seed seed, PathId path_id, std::uint64_t index) noexcept {
  const auto r = Philox4x32::apply(
      detail::make_counter(Stream::kAuxiliary, 0, path_id, index),
      detail::make_key(seed, path_id));
  return detail::to_unit(r[0], r[1]);
}

/// SplitMix64 finalizer; derives child seeds (e.g. for a second ensemble).
constexpr Seed derive_seed(Seed seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace noisereg
