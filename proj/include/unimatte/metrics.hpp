// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Matting metrics. SAD, Grad and Conn are reported in thousands; MSE is a raw
// mean over the region.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "unimatte/datasets.hpp"
#include "unimatte/field.hpp"
#include "unimatte/interactions.hpp"
#include "unimatte/model.hpp"

namespace unimatte {

enum class RegionMode { trimap_based, trimap_free };

std::string_view to_string(RegionMode m);
std::optional<RegionMode> parse_region_mode(std::string_view s);

struct RegionSpec {
  RegionMode mode = RegionMode::trimap_based;
  int unknown_band = 12;
};

/// dilate(alpha > 0, band) minus erode(alpha > 0.999, band). Throws on an empty
/// alpha or band < 1.
BinaryMask unknown_region(const Alpha& gt, int band);

/// Whole image for trimap_free, unknown_region otherwise.
BinaryMask metric_region(const Alpha& gt, const RegionSpec& spec);

/// `empty_region`, when given, is set to whether the region had no pixels (the metric is then 0).
double sad(const Alpha& pred, const Alpha& gt, const BinaryMask& region, bool* empty_region = nullptr);
double mse(const Alpha& pred, const Alpha& gt, const BinaryMask& region, bool* empty_region = nullptr);
double grad_metric(const Alpha& pred, const Alpha& gt, const BinaryMask& region,
                   bool* empty_region = nullptr);
double conn_metric(const Alpha& pred, const Alpha& gt, const BinaryMask& region,
                   bool* empty_region = nullptr);

/// First-order Gaussian derivative filter (sigma 1.4): 9 taps, unit L2 norm of the 2-D kernel.
inline constexpr double kGradSigma = 1.4;
inline constexpr int kGradHalfSize = 4;

/// Outer-product factors of the x-derivative kernel: kernel(r, c) = smooth[r] * deriv[c].
struct GradFilter {
  std::array<double, 2 * kGradHalfSize + 1> smooth;
  std::array<double, 2 * kGradHalfSize + 1> deriv;
};
const GradFilter& grad_filter();

/// Gradient magnitude of a matte under the filter, with replicated borders.
Plane gradient_magnitude(const Alpha& a);

/// Connectivity thresholds 0.1 .. 0.9 and cutoff.
inline constexpr int kConnLevels = 9;
inline constexpr double kConnCutoff = 0.15;

struct MetricValues {
  double mse = 0, sad = 0, grad = 0, conn = 0;
};

MetricValues sample_metrics(const Alpha& pred, const Alpha& gt, const BinaryMask& region,
                            bool* empty_region = nullptr);

struct CategoryRow {
  std::size_t count = 0;
  MetricValues mean;
};

struct MetricsReport {
  InteractionKind kind = InteractionKind::bbox;
  RegionSpec region;
  std::uint64_t seed = 0;
  std::array<std::optional<CategoryRow>, 4> categories;  // SO, ST, NSO, NST; absent -> nullopt
  CategoryRow overall;
  std::size_t empty_region_samples = 0;
  std::vector<std::string> notes;
};

/// Predicts an alpha for one record given its composite, the simulated interaction and
/// the guidance map.
using Predictor = std::function<Alpha(const Image& composite, const Interaction& it,
                                      const GuidanceMap& guidance)>;

MetricsReport evaluate_with(const Predictor& predict, const std::filesystem::path& root,
                            const Manifest& manifest, InteractionKind kind, const RegionSpec& region,
                            std::uint64_t seed, const SimulationOptions& sim = {});

/// Model-backed evaluation; the model's guidance kind must equal `kind`.
MetricsReport evaluate(Model& model, const std::filesystem::path& root, const Manifest& manifest,
                       InteractionKind kind, const RegionSpec& region, std::uint64_t seed,
                       const SimulationOptions& sim = {});

/// Rows SO, ST, NSO, NST, Overall; columns MSE, SAD, Grad, Conn, count.
std::string report_to_csv(const MetricsReport& r);
std::string report_to_json(const MetricsReport& r);

/// One row per interaction kind; columns <cat>_<metric> for cat in SO, ST, NSO, NST,
/// Overall and metric in MSE, SAD, Grad, Conn (20 value columns).
std::string sweep_to_csv(const std::vector<MetricsReport>& reports);

}  // namespace unimatte
