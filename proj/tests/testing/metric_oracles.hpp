// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Straightforward re-implementations of the matting metrics used as test oracles.
// They share no code with the library: plain loops, a dense 9x9 convolution and
// a queue-based flood fill.

#include <cmath>
#include <cstdlib>
#include <deque>
#include <numbers>
#include <vector>

#include "unimatte/field.hpp"

namespace unimatte::oracle {

inline double sad(const Alpha& p, const Alpha& g, const BinaryMask& region) {
  double s = 0;
  for (int r = 0; r < p.height(); ++r)
    for (int c = 0; c < p.width(); ++c)
      if (region(r, c)) s += std::fabs(p(r, c) - g(r, c));
  return s / 1000.0;
}

inline double mse(const Alpha& p, const Alpha& g, const BinaryMask& region) {
  double s = 0;
  int n = 0;
  for (int r = 0; r < p.height(); ++r)
    for (int c = 0; c < p.width(); ++c)
      if (region(r, c)) {
        s += (p(r, c) - g(r, c)) * (p(r, c) - g(r, c));
        ++n;
      }
  return n == 0 ? 0.0 : s / n;
}

/// 9x9 x-derivative-of-Gaussian kernel hx(i, j) = G(i) * G'(j), normalized to unit L2 norm.
inline std::vector<std::vector<double>> gradient_kernel(double sigma = 1.4, int half = 4) {
  const int n = 2 * half + 1;
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
  double norm = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double y = i - half, x = j - half;
      const double gy = std::exp(-y * y / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * std::numbers::pi));
      const double gx = std::exp(-x * x / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * std::numbers::pi));
      k[i][j] = gy * (-x * gx / (sigma * sigma));
      norm += k[i][j] * k[i][j];
    }
  for (auto& row : k)
    for (double& v : row) v /= std::sqrt(norm);
  return k;
}

/// Gradient magnitude by direct 2-D convolution with replicated borders.
inline std::vector<double> gradient_amplitude(const Alpha& a) {
  const auto hx = gradient_kernel();
  const int half = static_cast<int>(hx.size()) / 2;
  const int h = a.height(), w = a.width();
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double gx = 0, gy = 0;
      for (int i = -half; i <= half; ++i)
        for (int j = -half; j <= half; ++j) {
          const int rr = std::min(std::max(r - i, 0), h - 1);
          const int cc = std::min(std::max(c - j, 0), w - 1);
          gx += hx[i + half][j + half] * a(rr, cc);
          gy += hx[j + half][i + half] * a(rr, cc);  // hy = hx transposed
        }
      out[static_cast<std::size_t>(r) * w + c] = std::sqrt(gx * gx + gy * gy);
    }
  return out;
}

inline double grad(const Alpha& p, const Alpha& g, const BinaryMask& region) {
  const auto ap = gradient_amplitude(p), ag = gradient_amplitude(g);
  double s = 0;
  for (std::size_t i = 0; i < ap.size(); ++i)
    if (region.values()[i]) s += (ap[i] - ag[i]) * (ap[i] - ag[i]);
  return s / 1000.0;
}

/// Largest 4-connected component; components are discovered in column-major
/// order and the first of equal-sized components wins.
inline std::vector<char> largest_component(const std::vector<char>& on, int h, int w) {
  std::vector<int> label(on.size(), -1);
  std::vector<int> sizes;
  for (int c = 0; c < w; ++c)
    for (int r = 0; r < h; ++r) {
      const std::size_t start = static_cast<std::size_t>(r) * w + c;
      if (!on[start] || label[start] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      std::deque<std::pair<int, int>> q{{r, c}};
      label[start] = id;
      while (!q.empty()) {
        const auto [y, x] = q.front();
        q.pop_front();
        ++sizes[id];
        const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int yy = y + dy[k], xx = x + dx[k];
          if (yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
          const std::size_t n = static_cast<std::size_t>(yy) * w + xx;
          if (on[n] && label[n] < 0) {
            label[n] = id;
            q.push_back({yy, xx});
          }
        }
      }
    }
  std::vector<char> out(on.size(), 0);
  if (sizes.empty()) return out;
  int best = 0;
  for (int i = 1; i < static_cast<int>(sizes.size()); ++i)
    if (sizes[i] > sizes[best]) best = i;
  for (std::size_t i = 0; i < on.size(); ++i) out[i] = label[i] == best;
  return out;
}

inline double conn(const Alpha& p, const Alpha& g, const BinaryMask& region) {
  const int h = p.height(), w = p.width();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> level(n, -1.0);
  for (int i = 1; i <= 9; ++i) {
    const double t = i / 10.0;
    std::vector<char> on(n);
    for (std::size_t k = 0; k < n; ++k) on[k] = p.values()[k] >= t && g.values()[k] >= t;
    const auto omega = largest_component(on, h, w);
    for (std::size_t k = 0; k < n; ++k)
      if (level[k] == -1.0 && !omega[k]) level[k] = (i - 1) / 10.0;
  }
  double s = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double l = level[k] == -1.0 ? 1.0 : level[k];
    if (!region.values()[k]) continue;
    const double dp = p.values()[k] - l, dg = g.values()[k] - l;
    const double phi_p = 1.0 - (dp >= 0.15 ? dp : 0.0);
    const double phi_g = 1.0 - (dg >= 0.15 ? dg : 0.0);
    s += std::fabs(phi_p - phi_g);
  }
  return s / 1000.0;
}

}  // namespace unimatte::oracle
