// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstdint>
#include <optional>

#include "unimatte/field.hpp"

namespace unimatte {

/// out = alpha * fg + (1 - alpha) * bg, per pixel and channel.
Image composite(const Image& fg, const Image& bg, const Alpha& alpha);

/// 1 where alpha strictly exceeds the threshold.
BinaryMask binarize_alpha(const Alpha& alpha, MaskThreshold t = MaskThreshold{});

/// Chebyshev (square structuring element) dilation.
BinaryMask dilate(const BinaryMask& mask, int radius);

/// Dual of dilate: a pixel survives when every pixel within Chebyshev distance
/// `radius` is 1. Out-of-image pixels count as 1, so a full mask is a fixed point.
BinaryMask erode(const BinaryMask& mask, int radius);

/// Euclidean distance from each 1-pixel to the nearest 0-pixel, where the ring
/// just outside the image counts as 0. Zero on 0-pixels. Throws on an empty mask.
Plane distance_to_boundary(const BinaryMask& mask);

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_not(const BinaryMask& a);
std::size_t count_ones(const BinaryMask& m);

/// Tight bounding box of the 1-pixels, or nullopt for an empty mask.
std::optional<Box> bounding_box(const BinaryMask& m);

struct TrimapRadii {
  int fg_erode = 0;
  int bg_dilate = 0;
};

/// Inclusive range the random trimap radii are drawn from.
struct TrimapRadiusRange {
  int lo = 5;
  int hi = 25;
};

/// fg = erode(alpha > 0.999, fg_erode); bg = not dilate(alpha > 0, bg_dilate);
/// everything else unknown. Throws when alpha has no support.
Trimap make_trimap(const Alpha& alpha, TrimapRadii radii);

/// Same, with both radii drawn uniformly from `range` using `seed`.
Trimap make_trimap(const Alpha& alpha, std::uint64_t seed, TrimapRadiusRange range = {});

/// Radii make_trimap(alpha, seed, range) would use.
TrimapRadii draw_trimap_radii(std::uint64_t seed, TrimapRadiusRange range = {});

/// Corner-aligned bilinear resampling of a real field.
template <typename Tag>
Field<double, Tag> resize_bilinear(const Field<double, Tag>& field, int out_h, int out_w);

Image resize_bilinear(const Image& image, int out_h, int out_w);

/// Raw-buffer form shared by the field overloads and the network layers.
void resize_bilinear_plane(const double* in, int in_h, int in_w, double* out, int out_h,
                           int out_w);

/// True when every value lies in [0,1].
bool in_unit_range(std::span<const double> values);

}  // namespace unimatte

#include "unimatte/imaging_inl.hpp"
