// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/metrics.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "unimatte/error.hpp"
#include "unimatte/imaging.hpp"

namespace unimatte {

std::string_view to_string(RegionMode m) {
  return m == RegionMode::trimap_based ? "trimap_based" : "trimap_free";
}

std::optional<RegionMode> parse_region_mode(std::string_view s) {
  if (s == "trimap_based") return RegionMode::trimap_based;
  if (s == "trimap_free") return RegionMode::trimap_free;
  return std::nullopt;
}

BinaryMask unknown_region(const Alpha& gt, int band) {
  if (band < 1) throw InvalidInput("unknown_region: band must be >= 1");
  const BinaryMask support = binarize_alpha(gt);
  if (count_ones(support) == 0) throw InvalidInput("unknown_region: alpha is empty");
  const BinaryMask fg = binarize_alpha(gt, MaskThreshold(0.999));
  return mask_and(dilate(support, band), mask_not(erode(fg, band)));
}

BinaryMask metric_region(const Alpha& gt, const RegionSpec& spec) {
  if (spec.mode == RegionMode::trimap_free) return BinaryMask(gt.height(), gt.width(), 1);
  return unknown_region(gt, spec.unknown_band);
}

namespace {

void check(const Alpha& pred, const Alpha& gt, const BinaryMask& region, const char* what) {
  require_same_shape(pred, gt, what);
  require_same_shape(pred, region, what);
}

bool flag_empty(const BinaryMask& region, bool* empty_region) {
  const bool empty = count_ones(region) == 0;
  if (empty_region) *empty_region = empty;
  return empty;
}

// Largest 4-connected component of `m`; ties go to the component whose first pixel
// in column-major order comes first.
BinaryMask largest_component(const BinaryMask& m) {
  const int h = m.height(), w = m.width();
  std::vector<int> parent(m.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!m(r, c)) continue;
      const int i = r * w + c;
      if (c > 0 && m(r, c - 1)) parent[find(i)] = find(i - 1);
      if (r > 0 && m(r - 1, c)) parent[find(i)] = find(i - w);
    }
  std::vector<int> size(m.size(), 0), first(m.size(), INT32_MAX);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (m(r, c)) {
        const int root = find(r * w + c);
        ++size[root];
        first[root] = std::min(first[root], c * h + r);
      }
  int best = -1;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (size[i] == 0) continue;
    if (best < 0 || size[i] > size[best] || (size[i] == size[best] && first[i] < first[best]))
      best = static_cast<int>(i);
  }
  BinaryMask out(h, w, 0);
  if (best < 0) return out;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (m(r, c) && find(r * w + c) == best) out(r, c) = 1;
  return out;
}

GradFilter make_grad_filter() {
  GradFilter f{};
  const double s = kGradSigma;
  const auto gauss = [s](double x) {
    return std::exp(-x * x / (2 * s * s)) / (s * std::sqrt(2 * std::numbers::pi));
  };
  double s2 = 0, d2 = 0;
  for (int i = -kGradHalfSize; i <= kGradHalfSize; ++i) {
    f.smooth[i + kGradHalfSize] = gauss(i);
    f.deriv[i + kGradHalfSize] = -i * gauss(i) / (s * s);
    s2 += f.smooth[i + kGradHalfSize] * f.smooth[i + kGradHalfSize];
    d2 += f.deriv[i + kGradHalfSize] * f.deriv[i + kGradHalfSize];
  }
  // ||smooth (x) deriv||_2 = ||smooth|| * ||deriv||; split the normalization across both.
  for (double& v : f.smooth) v /= std::sqrt(s2);
  for (double& v : f.deriv) v /= std::sqrt(d2);
  return f;
}

}  // namespace

const GradFilter& grad_filter() {
  static const GradFilter f = make_grad_filter();
  return f;
}

double sad(const Alpha& pred, const Alpha& gt, const BinaryMask& region, bool* empty_region) {
  check(pred, gt, region, "sad");
  if (flag_empty(region, empty_region)) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (region.values()[i]) s += std::abs(pred.values()[i] - gt.values()[i]);
  return s / 1000.0;
}

double mse(const Alpha& pred, const Alpha& gt, const BinaryMask& region, bool* empty_region) {
  check(pred, gt, region, "mse");
  if (flag_empty(region, empty_region)) return 0.0;
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (region.values()[i]) {
      const double d = pred.values()[i] - gt.values()[i];
      s += d * d;
      ++n;
    }
  return s / static_cast<double>(n);
}

Plane gradient_magnitude(const Alpha& a) {
  const int h = a.height(), w = a.width(), k = kGradHalfSize;
  if (h < 2 * k + 1 || w < 2 * k + 1)
    throw ShapeError("grad_metric: image smaller than the 9x9 filter support");
  const GradFilter& f = grad_filter();
  const auto at = [&](int r, int c) {
    return a(std::clamp(r, 0, h - 1), std::clamp(c, 0, w - 1));
  };
  // Row pass (along columns) then column pass, for both derivative directions.
  Plane dx_row(h, w), sm_row(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double d = 0, s = 0;
      for (int j = -k; j <= k; ++j) {
        d += f.deriv[j + k] * at(r, c + j);
        s += f.smooth[j + k] * at(r, c + j);
      }
      dx_row(r, c) = d;
      sm_row(r, c) = s;
    }
  Plane mag(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double gx = 0, gy = 0;
      for (int i = -k; i <= k; ++i) {
        const int rr = std::clamp(r + i, 0, h - 1);
        gx += f.smooth[i + k] * dx_row(rr, c);
        gy += f.deriv[i + k] * sm_row(rr, c);
      }
      mag(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  return mag;
}

double grad_metric(const Alpha& pred, const Alpha& gt, const BinaryMask& region,
                   bool* empty_region) {
  check(pred, gt, region, "grad_metric");
  const Plane mp = gradient_magnitude(pred), mg = gradient_magnitude(gt);
  if (flag_empty(region, empty_region)) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (region.values()[i]) {
      const double d = mp.values()[i] - mg.values()[i];
      s += d * d;
    }
  return s / 1000.0;
}

double conn_metric(const Alpha& pred, const Alpha& gt, const BinaryMask& region,
                   bool* empty_region) {
  check(pred, gt, region, "conn_metric");
  if (flag_empty(region, empty_region)) return 0.0;
  const int h = pred.height(), w = pred.width();
  Plane level(h, w, -1.0);
  for (int i = 1; i <= kConnLevels; ++i) {
    const double t = i / 10.0;
    BinaryMask both(h, w, 0);
    for (std::size_t p = 0; p < pred.size(); ++p)
      both.values()[p] = pred.values()[p] >= t && gt.values()[p] >= t;
    const BinaryMask omega = largest_component(both);
    for (std::size_t p = 0; p < pred.size(); ++p)
      if (level.values()[p] == -1.0 && !omega.values()[p]) level.values()[p] = (i - 1) / 10.0;
  }
  double s = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    double& l = level.values()[p];
    if (l == -1.0) l = 1.0;
    if (!region.values()[p]) continue;
    const double dp = pred.values()[p] - l, dg = gt.values()[p] - l;
    const double phi_p = 1.0 - dp * (dp >= kConnCutoff ? 1.0 : 0.0);
    const double phi_g = 1.0 - dg * (dg >= kConnCutoff ? 1.0 : 0.0);
    s += std::abs(phi_p - phi_g);
  }
  return s / 1000.0;
}

MetricValues sample_metrics(const Alpha& pred, const Alpha& gt, const BinaryMask& region,
                            bool* empty_region) {
  MetricValues v;
  v.mse = mse(pred, gt, region, empty_region);
  v.sad = sad(pred, gt, region);
  v.grad = grad_metric(pred, gt, region);
  v.conn = conn_metric(pred, gt, region);
  return v;
}

}  // namespace unimatte
