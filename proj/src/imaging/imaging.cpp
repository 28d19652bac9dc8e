// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "unimatte/kernels.hpp"
#include "unimatte/rng.hpp"

namespace unimatte {

Image composite(const Image& fg, const Image& bg, const Alpha& alpha) {
  if (!fg.same_shape(bg) || !fg.same_shape(alpha))
    throw ShapeError("composite: fg, bg and alpha must share height and width");
  Image out(fg.height(), fg.width());
  const auto& k = kernels::active();
  for (int c = 0; c < Image::kChannels; ++c)
    k.blend(fg.plane_size(), fg.channel(c).data(), bg.channel(c).data(), alpha.data(),
            out.channel(c).data());
  return out;
}

BinaryMask binarize_alpha(const Alpha& alpha, MaskThreshold t) {
  BinaryMask m(alpha.height(), alpha.width());
  const double thr = t.value();
  for (std::size_t i = 0; i < alpha.size(); ++i) m.data()[i] = alpha.data()[i] > thr ? 1 : 0;
  return m;
}

namespace {

// One separable pass of a Chebyshev dilation: out[i] = any(in[i-r .. i+r]).
void dilate_line(const std::uint8_t* in, std::uint8_t* out, int n, std::ptrdiff_t stride,
                 int radius, std::vector<int>& prefix) {
  prefix.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (in[i * stride] ? 1 : 0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - radius);
    const int hi = std::min(n, i + radius + 1);
    out[i * stride] = (prefix[hi] - prefix[lo]) > 0 ? 1 : 0;
  }
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius < 0) throw InvalidInput("dilate: radius must be >= 0");
  if (radius == 0) return mask;
  const int h = mask.height(), w = mask.width();
  BinaryMask tmp(h, w), out(h, w);
  std::vector<int> prefix;
  for (int r = 0; r < h; ++r)
    dilate_line(mask.data() + static_cast<std::size_t>(r) * w,
                tmp.data() + static_cast<std::size_t>(r) * w, w, 1, radius, prefix);
  for (int c = 0; c < w; ++c) dilate_line(tmp.data() + c, out.data() + c, h, w, radius, prefix);
  return out;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius < 0) throw InvalidInput("erode: radius must be >= 0");
  return mask_not(dilate(mask_not(mask), radius));
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_and");
  BinaryMask out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = (a.data()[i] && b.data()[i]) ? 1 : 0;
  return out;
}

BinaryMask mask_not(const BinaryMask& a) {
  BinaryMask out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] ? 0 : 1;
  return out;
}

std::size_t count_ones(const BinaryMask& m) {
  return static_cast<std::size_t>(std::count_if(m.values().begin(), m.values().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

std::optional<Box> bounding_box(const BinaryMask& m) {
  Box b{m.height(), m.width(), -1, -1};
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c)
      if (m(r, c)) {
        b.r0 = std::min(b.r0, r);
        b.c0 = std::min(b.c0, c);
        b.r1 = std::max(b.r1, r);
        b.c1 = std::max(b.c1, c);
      }
  if (b.r1 < 0) return std::nullopt;
  return b;
}

namespace {

// Felzenszwalb-Huttenlocher 1-D squared distance transform. Infinite samples
// contribute no parabola; an all-infinite input stays infinite.
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;  // z[0] is -inf, so k never drops below 0
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d, d + n, inf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Plane distance_to_boundary(const BinaryMask& mask) {
  if (count_ones(mask) == 0) throw InvalidInput("distance_to_boundary: mask has no 1-pixels");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Pad by one ring of zeros so the image border acts as a boundary.
  const int h = mask.height() + 2, w = mask.width() + 2;
  std::vector<double> g(static_cast<std::size_t>(h) * w, 0.0);
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c)
      g[static_cast<std::size_t>(r + 1) * w + c + 1] = mask(r, c) ? inf : 0.0;

  std::vector<int> v;
  std::vector<double> z, fin(std::max(h, w)), fout(std::max(h, w));
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) fin[r] = g[static_cast<std::size_t>(r) * w + c];
    edt_1d(fin.data(), fout.data(), h, v, z);
    for (int r = 0; r < h; ++r) g[static_cast<std::size_t>(r) * w + c] = fout[r];
  }
  for (int r = 0; r < h; ++r) {
    double* row = g.data() + static_cast<std::size_t>(r) * w;
    std::copy(row, row + w, fin.begin());
    edt_1d(fin.data(), row, w, v, z);
  }

  Plane out(mask.height(), mask.width());
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c)
      out(r, c) = mask(r, c) ? std::sqrt(g[static_cast<std::size_t>(r + 1) * w + c + 1]) : 0.0;
  return out;
}

Trimap make_trimap(const Alpha& alpha, TrimapRadii radii) {
  const BinaryMask support = binarize_alpha(alpha, MaskThreshold{0.0});
  if (count_ones(support) == 0) throw InvalidInput("make_trimap: alpha has no foreground");
  const BinaryMask fg = erode(binarize_alpha(alpha, MaskThreshold{0.999}), radii.fg_erode);
  const BinaryMask near = dilate(support, radii.bg_dilate);
  Trimap t(alpha.height(), alpha.width(), kTrimapUnknown);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (fg.data()[i]) t.data()[i] = kTrimapForeground;
    else if (!near.data()[i]) t.data()[i] = kTrimapBackground;
  }
  return t;
}

TrimapRadii draw_trimap_radii(std::uint64_t seed, TrimapRadiusRange range) {
  if (range.lo < 0 || range.hi < range.lo) throw InvalidInput("make_trimap: bad radius range");
  Rng rng(derive_seed(seed, 0x7269));
  TrimapRadii r;
  r.fg_erode = static_cast<int>(rng.uniform_int(range.lo, range.hi));
  r.bg_dilate = static_cast<int>(rng.uniform_int(range.lo, range.hi));
  return r;
}

Trimap make_trimap(const Alpha& alpha, std::uint64_t seed, TrimapRadiusRange range) {
  return make_trimap(alpha, draw_trimap_radii(seed, range));
}

void resize_bilinear_plane(const double* in, int in_h, int in_w, double* out, int out_h,
                           int out_w) {
  const double sy = out_h > 1 ? double(in_h - 1) / double(out_h - 1) : 0.0;
  const double sx = out_w > 1 ? double(in_w - 1) / double(out_w - 1) : 0.0;
  for (int r = 0; r < out_h; ++r) {
    const double fy = r * sy;
    const int y0 = std::min(static_cast<int>(fy), in_h - 1);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double wy = fy - y0;
    for (int c = 0; c < out_w; ++c) {
      const double fx = c * sx;
      const int x0 = std::min(static_cast<int>(fx), in_w - 1);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double wx = fx - x0;
      const double top = in[y0 * in_w + x0] * (1.0 - wx) + in[y0 * in_w + x1] * wx;
      const double bot = in[y1 * in_w + x0] * (1.0 - wx) + in[y1 * in_w + x1] * wx;
      out[r * out_w + c] = top * (1.0 - wy) + bot * wy;
    }
  }
}

Image resize_bilinear(const Image& image, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ShapeError("resize_bilinear: output size must be >= 1");
  Image out(out_h, out_w);
  for (int c = 0; c < Image::kChannels; ++c)
    resize_bilinear_plane(image.channel(c).data(), image.height(), image.width(),
                          out.channel(c).data(), out_h, out_w);
  return out;
}

bool in_unit_range(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

}  // namespace unimatte
