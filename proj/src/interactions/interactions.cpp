// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/interactions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "unimatte/error.hpp"
#include "unimatte/imaging.hpp"
#include "unimatte/rng.hpp"

namespace unimatte {

std::string_view to_string(InteractionKind k) {
  switch (k) {
    case InteractionKind::fg_point: return "fg_point";
    case InteractionKind::fg_bg_points: return "fg_bg_points";
    case InteractionKind::bbox: return "bbox";
    case InteractionKind::extreme_points: return "extreme_points";
    case InteractionKind::scribble: return "scribble";
    case InteractionKind::trimap: return "trimap";
  }
  return "?";
}

std::optional<InteractionKind> parse_interaction_kind(std::string_view s) {
  for (InteractionKind k : kAllInteractionKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::string interaction_kind_list() {
  std::string out;
  for (InteractionKind k : kAllInteractionKinds) {
    if (!out.empty()) out += ", ";
    out += to_string(k);
  }
  return out;
}

int channels_for(InteractionKind k) { return k == InteractionKind::fg_bg_points ? 2 : 1; }

namespace {

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw InvalidInput(field + ": " + msg);
}

std::vector<Pixel> support_pixels(const Alpha& alpha) {
  std::vector<Pixel> px;
  for (int r = 0; r < alpha.height(); ++r)
    for (int c = 0; c < alpha.width(); ++c)
      if (alpha(r, c) > 0.0) px.push_back({r, c});
  return px;
}

BinaryMask support_mask(const Alpha& alpha) { return binarize_alpha(alpha, MaskThreshold{0.0}); }

void require_support(const Alpha& alpha, const char* who) {
  for (double a : alpha.values())
    if (a > 0.0) return;
  throw InvalidInput(std::string(who) + ": alpha has no nonzero support");
}

}  // namespace

void validate(const Interaction& it, int height, int width) {
  auto in_bounds = [&](int r, int c) { return r >= 0 && c >= 0 && r < height && c < width; };
  auto check_points = [&](std::size_t expected) {
    require(it.points.size() == expected, "points",
            "expected " + std::to_string(expected) + " points, got " +
                std::to_string(it.points.size()));
    for (std::size_t i = 0; i < it.points.size(); ++i)
      require(in_bounds(it.points[i].row, it.points[i].col), "points[" + std::to_string(i) + "]",
              "coordinate outside the " + std::to_string(height) + "x" + std::to_string(width) +
                  " image");
  };
  switch (it.kind) {
    case InteractionKind::fg_point:
      check_points(1);
      require(it.points[0].role == PointRole::foreground, "points[0]", "role must be foreground");
      break;
    case InteractionKind::fg_bg_points:
      check_points(5);
      require(it.points[0].role == PointRole::foreground, "points[0]", "role must be foreground");
      for (std::size_t i = 1; i < 5; ++i)
        require(it.points[i].role == PointRole::background, "points[" + std::to_string(i) + "]",
                "role must be background");
      break;
    case InteractionKind::extreme_points:
      check_points(4);
      break;
    case InteractionKind::bbox: {
      require(it.box.has_value(), "box", "missing");
      const Box& b = *it.box;
      require(b.r0 <= b.r1 && b.c0 <= b.c1, "box", "top-left must not exceed bottom-right");
      require(in_bounds(b.r0, b.c0) && in_bounds(b.r1, b.c1), "box", "corner outside the image");
      break;
    }
    case InteractionKind::scribble:
      require(!it.stroke.empty(), "stroke", "empty stroke");
      for (const Pixel& p : it.stroke)
        require(in_bounds(p.row, p.col), "stroke", "pixel outside the image");
      break;
    case InteractionKind::trimap:
      require(!it.trimap.empty(), "trimap", "missing");
      require(it.trimap.height() == height && it.trimap.width() == width, "trimap",
              "dimensions differ from the image");
      for (double v : it.trimap.values())
        require(v == kTrimapBackground || v == kTrimapUnknown || v == kTrimapForeground, "trimap",
                "values must be 0, 0.5 or 1");
      break;
  }
}

Interaction simulate_fg_point(const Alpha& alpha, std::uint64_t seed,
                              const SimulationOptions& opt) {
  require_support(alpha, "simulate_fg_point");
  const Plane dist = distance_to_boundary(support_mask(alpha));
  Pixel best{0, 0};
  double best_d = -1.0;
  for (int r = 0; r < dist.height(); ++r)
    for (int c = 0; c < dist.width(); ++c)
      if (dist(r, c) > best_d) {
        best_d = dist(r, c);
        best = {r, c};
      }

  Rng rng(derive_seed(seed, 0x6670));
  const int j = std::max(0, opt.fg_jitter);
  Pixel p{best.row + static_cast<int>(rng.uniform_int(-j, j)),
          best.col + static_cast<int>(rng.uniform_int(-j, j))};
  p.row = std::clamp(p.row, 0, alpha.height() - 1);
  p.col = std::clamp(p.col, 0, alpha.width() - 1);
  if (!(alpha(p.row, p.col) > 0.0)) {
    // Project onto the nearest support pixel.
    long best2 = std::numeric_limits<long>::max();
    Pixel proj = best;
    for (const Pixel& s : support_pixels(alpha)) {
      const long dr = s.row - p.row, dc = s.col - p.col;
      const long d2 = dr * dr + dc * dc;
      if (d2 < best2) {
        best2 = d2;
        proj = s;
      }
    }
    p = proj;
  }
  Interaction it;
  it.kind = InteractionKind::fg_point;
  it.points = {{p.row, p.col, PointRole::foreground}};
  return it;
}

Interaction simulate_bbox(const Alpha& alpha, const SimulationOptions& opt) {
  require_support(alpha, "simulate_bbox");
  Box b = *bounding_box(support_mask(alpha));
  b.r0 = std::max(0, b.r0 - opt.bbox_margin);
  b.c0 = std::max(0, b.c0 - opt.bbox_margin);
  b.r1 = std::min(alpha.height() - 1, b.r1 + opt.bbox_margin);
  b.c1 = std::min(alpha.width() - 1, b.c1 + opt.bbox_margin);
  Interaction it;
  it.kind = InteractionKind::bbox;
  it.box = b;
  return it;
}

Interaction simulate_bg_points(const Alpha& alpha, std::uint64_t seed,
                               const SimulationOptions& opt) {
  require_support(alpha, "simulate_bg_points");
  const Interaction fg = simulate_fg_point(alpha, seed, opt);
  const Box b = *simulate_bbox(alpha, opt).box;
  Interaction it;
  it.kind = InteractionKind::fg_bg_points;
  it.points = {fg.points[0],
               {b.r0, b.c0, PointRole::background},
               {b.r0, b.c1, PointRole::background},
               {b.r1, b.c0, PointRole::background},
               {b.r1, b.c1, PointRole::background}};
  return it;
}

std::array<Pixel, 4> extreme_pixels(const Alpha& alpha) {
  require_support(alpha, "extreme_points");
  const int h = alpha.height(), w = alpha.width();
  // Middle pixel of the extreme row/column, so symmetric shapes give the apex.
  auto middle = [](std::vector<int>& v) { return v[(v.size() - 1) / 2]; };
  std::array<Pixel, 4> out{};
  std::vector<int> run;
  for (int r = 0; r < h && run.empty(); ++r)
    for (int c = 0; c < w; ++c)
      if (alpha(r, c) > 0.0) run.push_back(c), out[0].row = r;
  out[0].col = middle(run);
  run.clear();
  for (int r = h - 1; r >= 0 && run.empty(); --r)
    for (int c = 0; c < w; ++c)
      if (alpha(r, c) > 0.0) run.push_back(c), out[1].row = r;
  out[1].col = middle(run);
  run.clear();
  for (int c = 0; c < w && run.empty(); ++c)
    for (int r = 0; r < h; ++r)
      if (alpha(r, c) > 0.0) run.push_back(r), out[2].col = c;
  out[2].row = middle(run);
  run.clear();
  for (int c = w - 1; c >= 0 && run.empty(); --c)
    for (int r = 0; r < h; ++r)
      if (alpha(r, c) > 0.0) run.push_back(r), out[3].col = c;
  out[3].row = middle(run);
  return out;
}

Interaction simulate_extreme_points(const Alpha& alpha, std::uint64_t seed,
                                    const SimulationOptions& opt) {
  const auto ext = extreme_pixels(alpha);
  Rng rng(derive_seed(seed, 0x6578));
  const int j = std::max(0, opt.extreme_jitter);
  Interaction it;
  it.kind = InteractionKind::extreme_points;
  for (int i = 0; i < 4; ++i) {
    Pixel p = ext[i];
    const int d = static_cast<int>(rng.uniform_int(-j, j));
    // top/bottom slide along columns, left/right along rows
    if (i < 2) p.col = std::clamp(p.col + d, 0, alpha.width() - 1);
    else p.row = std::clamp(p.row + d, 0, alpha.height() - 1);
    it.points.push_back({p.row, p.col, PointRole::foreground});
  }
  return it;
}

namespace {

// Second derivatives of a natural cubic spline through (t[i], y[i]).
std::vector<double> spline_moments(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  // Thomas algorithm on the interior equations.
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = t[i + 1] - t[i];  // h of row i, sub-diagonal
    const double f = lower / diag[i - 1];
    diag[i] -= f * upper[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  std::vector<double> sol(k);
  sol[k - 1] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
  for (std::size_t i = 0; i < k; ++i) m[i + 1] = sol[i];
  return m;
}

double spline_eval(const std::vector<double>& t, const std::vector<double>& y,
                   const std::vector<double>& m, std::size_t seg, double x) {
  const double h = t[seg + 1] - t[seg];
  const double a = (t[seg + 1] - x) / h, b = (x - t[seg]) / h;
  return a * y[seg] + b * y[seg + 1] +
         ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * (h * h) / 6.0;
}

void append_line(std::vector<Pixel>& out, Pixel a, Pixel b) {
  // Bresenham from a (exclusive when already present) to b.
  int dr = std::abs(b.row - a.row), dc = std::abs(b.col - a.col);
  const int sr = a.row < b.row ? 1 : -1, sc = a.col < b.col ? 1 : -1;
  int err = dc - dr;
  Pixel p = a;
  while (!(p == b)) {
    const int e2 = 2 * err;
    if (e2 > -dr) err -= dr, p.col += sc;
    if (e2 < dc) err += dc, p.row += sr;
    out.push_back(p);
  }
}

}  // namespace

std::vector<Pixel> rasterize_spline(std::span<const Pixel> control, int height, int width) {
  std::vector<Pixel> line;
  auto clip = [&](double r, double c) {
    return Pixel{std::clamp(static_cast<int>(std::lround(r)), 0, height - 1),
                 std::clamp(static_cast<int>(std::lround(c)), 0, width - 1)};
  };
  if (control.empty()) return line;
  if (control.size() == 1) return {clip(control[0].row, control[0].col)};

  std::vector<double> t{0.0}, ys, xs;
  for (const Pixel& p : control) ys.push_back(p.row), xs.push_back(p.col);
  for (std::size_t i = 1; i < control.size(); ++i)
    t.push_back(t.back() + std::max(1e-9, std::hypot(ys[i] - ys[i - 1], xs[i] - xs[i - 1])));
  const auto my = spline_moments(t, ys), mx = spline_moments(t, xs);

  line.push_back(clip(ys[0], xs[0]));
  for (std::size_t seg = 0; seg + 1 < t.size(); ++seg) {
    const int steps = std::max(1, static_cast<int>(std::ceil((t[seg + 1] - t[seg]) * 4.0)));
    for (int s = 1; s <= steps; ++s) {
      const double x = t[seg] + (t[seg + 1] - t[seg]) * s / steps;
      const Pixel p = clip(spline_eval(t, ys, my, seg, x), spline_eval(t, xs, mx, seg, x));
      if (!(p == line.back())) append_line(line, line.back(), p);
    }
  }
  return line;
}

std::vector<ScribbleCandidate> scribble_candidates(const Alpha& alpha, std::uint64_t seed,
                                                   const SimulationOptions& opt) {
  const std::vector<Pixel> support = support_pixels(alpha);
  if (support.size() < 3) throw InvalidInput("simulate_scribble: support has fewer than 3 pixels");
  const int h = alpha.height(), w = alpha.width();
  const int radius = std::max(0, (opt.scribble_width - 1) / 2);

  std::vector<ScribbleCandidate> out;
  for (int cand = 0; cand < opt.scribble_candidates; ++cand) {
    Rng rng(derive_seed(seed, 0x7363'0000ull + cand));
    const std::size_t want = std::min<std::size_t>(support.size(), rng.bernoulli(0.5) ? 4 : 3);
    std::vector<std::size_t> picks;
    while (picks.size() < want) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, support.size() - 1));
      if (std::find(picks.begin(), picks.end(), i) == picks.end()) picks.push_back(i);
    }
    ScribbleCandidate sc;
    for (std::size_t i : picks) sc.control_points.push_back(support[i]);
    // Order along the dominant axis so the curve sweeps rather than loops.
    int rmin = h, rmax = -1, cmin = w, cmax = -1;
    for (const Pixel& p : sc.control_points) {
      rmin = std::min(rmin, p.row), rmax = std::max(rmax, p.row);
      cmin = std::min(cmin, p.col), cmax = std::max(cmax, p.col);
    }
    const bool by_row = (rmax - rmin) >= (cmax - cmin);
    std::sort(sc.control_points.begin(), sc.control_points.end(), [&](Pixel a, Pixel b) {
      return by_row ? std::pair(a.row, a.col) < std::pair(b.row, b.col)
                    : std::pair(a.col, a.row) < std::pair(b.col, b.row);
    });

    BinaryMask m(h, w);
    for (const Pixel& p : rasterize_spline(sc.control_points, h, w)) m(p.row, p.col) = 1;
    m = dilate(m, radius);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (m(r, c)) {
          sc.stroke.push_back({r, c});
          sc.coverage += alpha(r, c);
        }
    out.push_back(std::move(sc));
  }
  return out;
}

Interaction simulate_scribble(const Alpha& alpha, std::uint64_t seed,
                              const SimulationOptions& opt) {
  auto cands = scribble_candidates(alpha, seed, opt);
  std::size_t best = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].coverage > cands[best].coverage) best = i;
  Interaction it;
  it.kind = InteractionKind::scribble;
  it.stroke = std::move(cands[best].stroke);
  return it;
}

Interaction simulate_trimap(const Alpha& alpha, std::uint64_t seed) {
  Interaction it;
  it.kind = InteractionKind::trimap;
  it.trimap = make_trimap(alpha, seed);
  return it;
}

Interaction simulate(InteractionKind kind, const Alpha& alpha, std::uint64_t seed,
                     const SimulationOptions& opt) {
  switch (kind) {
    case InteractionKind::fg_point: return simulate_fg_point(alpha, seed, opt);
    case InteractionKind::fg_bg_points: return simulate_bg_points(alpha, seed, opt);
    case InteractionKind::bbox: return simulate_bbox(alpha, opt);
    case InteractionKind::extreme_points: return simulate_extreme_points(alpha, seed, opt);
    case InteractionKind::scribble: return simulate_scribble(alpha, seed, opt);
    case InteractionKind::trimap: return simulate_trimap(alpha, seed);
  }
  throw InvalidInput("simulate: unknown interaction kind");
}

namespace {

void stamp_gaussian(double* plane, int h, int w, const GuidePoint& p, double sigma) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int r = 0; r < h; ++r) {
    const double dr2 = double(r - p.row) * (r - p.row);
    for (int c = 0; c < w; ++c) {
      const double dc = c - p.col;
      plane[static_cast<std::size_t>(r) * w + c] += std::exp(-(dr2 + dc * dc) * inv);
    }
  }
}

}  // namespace

GuidanceMap empty_guidance(InteractionKind kind, int height, int width) {
  GuidanceMap g;
  g.kind = kind;
  g.height = height;
  g.width = width;
  g.channels = channels_for(kind);
  g.values.assign(static_cast<std::size_t>(g.channels) * height * width, 0.0);
  return g;
}

GuidanceMap encode_guidance(const Interaction& it, int height, int width, double point_sigma) {
  validate(it, height, width);
  GuidanceMap g = empty_guidance(it.kind, height, width);
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  switch (it.kind) {
    case InteractionKind::fg_point:
    case InteractionKind::extreme_points:
      for (const GuidePoint& p : it.points)
        stamp_gaussian(g.values.data(), height, width, p, point_sigma);
      break;
    case InteractionKind::fg_bg_points:
      for (const GuidePoint& p : it.points)
        stamp_gaussian(g.values.data() + (p.role == PointRole::foreground ? 0 : plane), height,
                       width, p, point_sigma);
      break;
    case InteractionKind::bbox:
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
          g.values[static_cast<std::size_t>(r) * width + c] = it.box->contains(r, c) ? 0.0 : 1.0;
      break;
    case InteractionKind::scribble:
      for (const Pixel& p : it.stroke) g.values[static_cast<std::size_t>(p.row) * width + p.col] = 1.0;
      break;
    case InteractionKind::trimap:
      std::copy(it.trimap.values().begin(), it.trimap.values().end(), g.values.begin());
      break;
  }
  for (double& v : g.values) v = std::min(v, 1.0);
  return g;
}

}  // namespace unimatte
