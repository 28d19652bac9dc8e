// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unimatte/field.hpp"

namespace unimatte {

enum class InteractionKind : std::uint8_t {
  fg_point,
  fg_bg_points,
  bbox,
  extreme_points,
  scribble,
  trimap,
};

inline constexpr std::array<InteractionKind, 6> kAllInteractionKinds = {
    InteractionKind::fg_point,       InteractionKind::fg_bg_points, InteractionKind::bbox,
    InteractionKind::extreme_points, InteractionKind::scribble,     InteractionKind::trimap};

std::string_view to_string(InteractionKind k);
std::optional<InteractionKind> parse_interaction_kind(std::string_view s);

/// Comma-separated list of valid kind names, for usage messages.
std::string interaction_kind_list();

/// Number of guidance channels a kind rasterizes to.
int channels_for(InteractionKind k);

enum class PointRole : int { background = 0, foreground = 1 };

struct GuidePoint {
  int row = 0;
  int col = 0;
  PointRole role = PointRole::foreground;
  friend bool operator==(const GuidePoint&, const GuidePoint&) = default;
};

/// A user hint in image pixel coordinates (row, col; origin top-left).
///
/// Geometry by kind:
///   fg_point        points = {fg}
///   fg_bg_points    points = {fg, bg, bg, bg, bg}
///   bbox            box
///   extreme_points  points = {top, bottom, left, right}
///   scribble        stroke (pixel set, raster order)
///   trimap          trimap (+ optional trimap_ref naming its PNG)
struct Interaction {
  InteractionKind kind = InteractionKind::fg_point;
  std::vector<GuidePoint> points;
  std::optional<Box> box;
  std::vector<Pixel> stroke;
  Trimap trimap;
  std::string trimap_ref;
};

/// Throws InvalidInput naming the offending field when `it` violates its kind's
/// invariants or leaves the h x w image.
void validate(const Interaction& it, int height, int width);

/// Extra input channels concatenated after RGB.
struct GuidanceMap {
  InteractionKind kind = InteractionKind::fg_point;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;  // channel-major

  std::span<const double> channel(int c) const {
    return {values.data() + static_cast<std::size_t>(c) * height * width,
            static_cast<std::size_t>(height) * width};
  }
  double at(int c, int row, int col) const {
    return values[(static_cast<std::size_t>(c) * height + row) * width + col];
  }
};

struct SimulationOptions {
  int fg_jitter = 5;         // per-axis, pixels
  int extreme_jitter = 10;   // along the boundary tangent, pixels
  int bbox_margin = 10;
  int scribble_candidates = 5;
  int scribble_width = 5;    // odd; square dilation of the rasterized curve
  double point_sigma = 10.0; // Gaussian stamp
};

Interaction simulate_fg_point(const Alpha& alpha, std::uint64_t seed,
                              const SimulationOptions& opt = {});
Interaction simulate_bbox(const Alpha& alpha, const SimulationOptions& opt = {});
Interaction simulate_bg_points(const Alpha& alpha, std::uint64_t seed,
                               const SimulationOptions& opt = {});
Interaction simulate_extreme_points(const Alpha& alpha, std::uint64_t seed,
                                    const SimulationOptions& opt = {});
Interaction simulate_scribble(const Alpha& alpha, std::uint64_t seed,
                              const SimulationOptions& opt = {});
Interaction simulate_trimap(const Alpha& alpha, std::uint64_t seed);

/// Dispatch on kind.
Interaction simulate(InteractionKind kind, const Alpha& alpha, std::uint64_t seed,
                     const SimulationOptions& opt = {});

/// The un-jittered extremes in {top, bottom, left, right} order.
std::array<Pixel, 4> extreme_pixels(const Alpha& alpha);

struct ScribbleCandidate {
  std::vector<Pixel> control_points;
  std::vector<Pixel> stroke;  // dilated, raster order, in-bounds
  double coverage = 0.0;      // summed alpha under the stroke
};

/// All candidates simulate_scribble chooses from, in draw order.
std::vector<ScribbleCandidate> scribble_candidates(const Alpha& alpha, std::uint64_t seed,
                                                   const SimulationOptions& opt = {});

/// Centre-line pixels of an interpolating natural cubic spline through the
/// given points (chord-length parameterized), clipped to the image.
std::vector<Pixel> rasterize_spline(std::span<const Pixel> control, int height, int width);

GuidanceMap encode_guidance(const Interaction& it, int height, int width,
                            double point_sigma = 10.0);

/// All-zero guidance for a kind (no hint given).
GuidanceMap empty_guidance(InteractionKind kind, int height, int width);

}  // namespace unimatte
