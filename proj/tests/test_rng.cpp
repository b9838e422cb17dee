#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "noisereg/rng.hpp"

using namespace noisereg;

// Known-answer vectors from the Random123 distribution (kat_vectors, philox4x32 R=10).
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::apply({0u, 0u, 0u, 0u}, {0u, 0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Rng, SameAddressSameDraw) {
  const Vec a = normal_vector(42, 7, 1000, 5);
  const Vec b = normal_vector(42, 7, 1000, 5);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, normal_vector(42, 8, 1000, 5));
  EXPECT_NE(a, normal_vector(42, 7, 1001, 5));
  EXPECT_NE(a, normal_vector(43, 7, 1000, 5));
}

TEST(Rng, OddLengthIsPrefixOfEven) {
  // Draws are addressed by position, so a shorter request is a prefix.
  const Vec a = normal_vector(1, 2, 3, 3);
  const Vec b = normal_vector(1, 2, 3, 4);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Rng, UniformInOpenUnitInterval) {
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = uniform01(9, 0, i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, NormalMomentsProperty) {
  const std::size_t n = 200000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double z[2];
    normal_increments(5, static_cast<PathId>(i), 0, std::span<double>(z, 2));
    for (double v : z) {
      s1 += v;
      s2 += v * v;
      s3 += v * v * v;
      s4 += v * v * v * v;
    }
  }
  const double m = 2.0 * n;
  EXPECT_NEAR(s1 / m, 0.0, 5.0 / std::sqrt(m));
  EXPECT_NEAR(s2 / m, 1.0, 5.0 * std::sqrt(2.0 / m));
  EXPECT_NEAR(s3 / m, 0.0, 5.0 * std::sqrt(15.0 / m));
  EXPECT_NEAR(s4 / m, 3.0, 5.0 * std::sqrt(96.0 / m));
}

TEST(Rng, DeriveSeedSpreads) {
  std::set<Seed> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(20240611, s));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}
