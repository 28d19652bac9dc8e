// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "unimatte/field.hpp"

namespace unimatte {

/// Saliency x transparency image class.
enum class Category : std::uint8_t { SO = 0, ST = 1, NSO = 2, NST = 3 };

inline constexpr std::array<Category, 4> kAllCategories = {Category::SO, Category::ST,
                                                           Category::NSO, Category::NST};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

constexpr bool is_salient(Category c) { return c == Category::SO || c == Category::ST; }
constexpr bool is_transparent(Category c) { return c == Category::ST || c == Category::NST; }

struct AlphaHistogram {
  static constexpr int kBins = 256;
  std::array<std::uint64_t, kBins> bins{};
  std::uint64_t total = 0;
};

/// Bin index of an alpha value under 256 uniform bins over [0,1]; 1.0 lands in the last bin.
int histogram_bin(double alpha);

/// Histogram of alpha restricted to region; throws on an empty region.
AlphaHistogram alpha_histogram(const Alpha& alpha, const BinaryMask& region);

/// Fraction of support pixels (alpha > 0) whose alpha lies strictly inside
/// (1/255, 1 - 1/255). Zero for an empty support.
double transparency_fraction(const Alpha& alpha);

/// Opacity threshold on transparency_fraction separating opaque from transparent.
inline constexpr double kTransparencyThreshold = 0.3;

/// Tag from manifest object count (saliency) and target alpha (opacity).
Category classify_sample(const Alpha& alpha, int object_count);

Category classify_fraction(double transparency_fraction, int object_count);

}  // namespace unimatte
