// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/taxonomy.hpp"

#include <algorithm>

#include "unimatte/error.hpp"

namespace unimatte {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::SO: return "SO";
    case Category::ST: return "ST";
    case Category::NSO: return "NSO";
    case Category::NST: return "NST";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view s) {
  for (Category c : kAllCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

int histogram_bin(double alpha) {
  const int b = static_cast<int>(alpha * AlphaHistogram::kBins);
  return std::clamp(b, 0, AlphaHistogram::kBins - 1);
}

AlphaHistogram alpha_histogram(const Alpha& alpha, const BinaryMask& region) {
  require_same_shape(alpha, region, "alpha_histogram");
  AlphaHistogram h;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!region.data()[i]) continue;
    ++h.bins[histogram_bin(alpha.data()[i])];
    ++h.total;
  }
  if (h.total == 0) throw InvalidInput("alpha_histogram: empty region");
  return h;
}

double transparency_fraction(const Alpha& alpha) {
  constexpr double eps = 1.0 / 255.0;
  std::size_t support = 0, partial = 0;
  for (double a : alpha.values()) {
    if (a <= 0.0) continue;
    ++support;
    if (a > eps && a < 1.0 - eps) ++partial;
  }
  return support == 0 ? 0.0 : static_cast<double>(partial) / static_cast<double>(support);
}

Category classify_fraction(double fraction, int object_count) {
  if (object_count < 1) throw InvalidInput("classify_sample: object_count must be >= 1");
  const bool salient = object_count == 1;
  const bool opaque = fraction < kTransparencyThreshold;
  if (salient) return opaque ? Category::SO : Category::ST;
  return opaque ? Category::NSO : Category::NST;
}

Category classify_sample(const Alpha& alpha, int object_count) {
  if (alpha.empty()) throw InvalidInput("classify_sample: missing alpha");
  return classify_fraction(transparency_fraction(alpha), object_count);
}

}  // namespace unimatte
