// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include <gtest/gtest.h>

#include "testing/fixtures.hpp"
#include "unimatte/error.hpp"
#include "unimatte/taxonomy.hpp"

namespace unimatte {
namespace {

TEST(Histogram, OnesLandInLastBin) {
  const AlphaHistogram h = alpha_histogram(Alpha(4, 4, 1.0), BinaryMask(4, 4, 1));
  EXPECT_EQ(h.bins.back(), 16u);
  EXPECT_EQ(h.total, 16u);
}

TEST(Histogram, HalfLandsInOneBin) {
  const AlphaHistogram h = alpha_histogram(Alpha(3, 5, 0.5), BinaryMask(3, 5, 1));
  const int b = histogram_bin(0.5);
  EXPECT_EQ(h.bins[b], 15u);
  EXPECT_LE(b / 256.0, 0.5);
  EXPECT_GE((b + 1) / 256.0, 0.5);
}

TEST(Histogram, MatchesDirectTally) {
  const Alpha a = testing::random_alpha(16, 16, 11);
  const BinaryMask region = testing::random_mask(16, 16, 0.6, 12);
  const AlphaHistogram h = alpha_histogram(a, region);
  std::array<std::uint64_t, 256> want{};
  std::uint64_t total = 0;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      if (region(r, c)) {
        const int b = std::min(255, static_cast<int>(a(r, c) * 256.0));
        ++want[b];
        ++total;
      }
  EXPECT_EQ(h.bins, want);
  EXPECT_EQ(h.total, total);
}

TEST(Histogram, EmptyRegionThrows) {
  EXPECT_THROW(alpha_histogram(Alpha(2, 2), BinaryMask(2, 2)), InvalidInput);
}

TEST(TransparencyFraction, BinaryIsZero) {
  EXPECT_EQ(transparency_fraction(testing::disk_alpha(20, 20, 10, 10, 6)), 0.0);
}

TEST(TransparencyFraction, HalfIsOne) { EXPECT_EQ(transparency_fraction(Alpha(6, 6, 0.5)), 1.0); }

TEST(TransparencyFraction, HalfAndHalf) {
  Alpha a(4, 4);
  for (int i = 0; i < 8; ++i) a.values()[i] = 1.0;
  for (int i = 8; i < 16; ++i) a.values()[i] = 0.5;
  EXPECT_DOUBLE_EQ(transparency_fraction(a), 0.5);
}

TEST(TransparencyFraction, IgnoresZeroPixelsAndNearBinary) {
  Alpha a(1, 4);
  a(0, 0) = 0.0;
  a(0, 1) = 0.5 / 255;  // within epsilon of 0 but nonzero: support, not transparent
  a(0, 2) = 1.0 - 0.5 / 255;
  a(0, 3) = 0.4;
  EXPECT_DOUBLE_EQ(transparency_fraction(a), 1.0 / 3.0);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify_sample(testing::disk_alpha(20, 20, 10, 10, 6), 1), Category::SO);
  EXPECT_EQ(classify_sample(Alpha(8, 8, 0.5), 1), Category::ST);
  EXPECT_EQ(classify_fraction(0.6, 3), Category::NST);
  EXPECT_EQ(classify_fraction(0.1, 2), Category::NSO);
  EXPECT_EQ(classify_fraction(0.3, 1), Category::ST);  // opaque needs fraction strictly below 0.3
}

TEST(Classify, NamesRoundTrip) {
  for (Category c : kAllCategories) EXPECT_EQ(parse_category(to_string(c)), c);
  EXPECT_FALSE(parse_category("XX"));
}

}  // namespace
}  // namespace unimatte
