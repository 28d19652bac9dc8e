// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unimatte/datasets.hpp"
#include "unimatte/error.hpp"
#include "unimatte/png_io.hpp"
#include "unimatte/rng.hpp"

namespace unimatte {
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Wave {
  double fy, fx, phase, amp;
};

std::vector<Wave> random_waves(Rng& rng, int n, double max_freq, double amp) {
  std::vector<Wave> w(n);
  for (Wave& v : w) {
    v.fy = rng.uniform(-max_freq, max_freq);
    v.fx = rng.uniform(-max_freq, max_freq);
    v.phase = rng.uniform(0.0, kTwoPi);
    v.amp = amp * rng.uniform(0.5, 1.0);
  }
  return w;
}

double eval_waves(const std::vector<Wave>& w, double y, double x) {
  double s = 0.0;
  for (const Wave& v : w) s += v.amp * std::sin(kTwoPi * (v.fy * y + v.fx * x) + v.phase);
  return s;
}

// Smooth color field: linear gradient between two colors plus texture waves.
void paint(Image& img, Rng& rng, double texture_amp) {
  const int h = img.height(), w = img.width();
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.uniform(0.05, 0.95);
    c1[c] = rng.uniform(0.05, 0.95);
  }
  const double dir = rng.uniform(0.0, kTwoPi);
  const double dy = std::sin(dir), dx = std::cos(dir);
  std::vector<Wave> tex[3];
  for (auto& t : tex) t = random_waves(rng, 3, 0.08, texture_amp);
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col) {
      const double y = static_cast<double>(r) / h - 0.5, x = static_cast<double>(col) / w - 0.5;
      const double t = std::clamp(0.5 + dy * y + dx * x, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        const double v = c0[c] + t * (c1[c] - c0[c]) + eval_waves(tex[c], r, col);
        img(c, r, col) = std::clamp(v, 0.0, 1.0);
      }
    }
}

std::vector<fs::path> sorted_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ForegroundSource generate_foreground(const std::string& id, Opacity opacity, int size,
                                     std::uint64_t seed) {
  if (size < 16) throw InvalidInput("foreground size must be >= 16");
  Rng rng(seed);
  ForegroundSource src{id, Image(size, size), Alpha(size, size)};
  paint(src.fg, rng, 0.08);

  const double cy = rng.uniform(0.38, 0.62) * size, cx = rng.uniform(0.38, 0.62) * size;
  const double base = rng.uniform(0.2, 0.28) * size;
  double amp[4], phase[4];
  for (int k = 0; k < 4; ++k) {
    amp[k] = rng.uniform(0.0, 0.06);
    phase[k] = rng.uniform(0.0, kTwoPi);
  }
  const auto inner = random_waves(rng, 3, 3.0 / size, 1.0);
  const double lo = rng.uniform(0.3, 0.4), hi = rng.uniform(0.65, 0.8);

  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const double y = r - cy, x = c - cx;
      const double d = std::hypot(y, x), th = std::atan2(y, x);
      double rad = 1.0;
      for (int k = 0; k < 4; ++k) rad += amp[k] * std::sin((k + 2) * th + phase[k]);
      double a = std::clamp(base * rad - d + 0.5, 0.0, 1.0);
      if (opacity == Opacity::transparent && a > 0.0) {
        const double t = 0.5 + 0.25 * eval_waves(inner, r, c) / 3.0;
        a *= lo + (hi - lo) * std::clamp(t, 0.0, 1.0);
      }
      src.alpha(r, c) = a;
    }
  return src;
}

BackgroundSource generate_background(const std::string& id, int size, std::uint64_t seed) {
  if (size < 16) throw InvalidInput("background size must be >= 16");
  Rng rng(seed);
  BackgroundSource b{id, Image(size, size)};
  paint(b.image, rng, 0.12);
  return b;
}

void write_sources(const fs::path& dir, std::span<const ForegroundSource> fgs,
                   std::span<const BackgroundSource> bgs) {
  for (const auto& f : fgs) {
    png::write_rgb(dir / "fg" / (f.id + ".png"), f.fg);
    png::write_alpha(dir / "alpha" / (f.id + ".png"), f.alpha);
  }
  for (const auto& b : bgs) png::write_rgb(dir / "bg" / (b.id + ".png"), b.image);
}

std::vector<ForegroundSource> read_foregrounds(const fs::path& dir) {
  std::vector<ForegroundSource> out;
  for (const auto& p : sorted_pngs(dir / "fg")) {
    const fs::path ap = dir / "alpha" / p.filename();
    if (!fs::exists(ap)) throw InvalidInput("missing alpha for foreground " + p.string());
    ForegroundSource s{p.stem().string(), png::read_rgb(p), png::read_alpha(ap)};
    require_same_shape(s.fg, s.alpha, "foreground");
    out.push_back(std::move(s));
  }
  if (out.empty()) throw InvalidInput("no foregrounds under " + (dir / "fg").string());
  return out;
}

std::vector<BackgroundSource> read_backgrounds(const fs::path& dir) {
  const fs::path d = fs::is_directory(dir / "bg") ? dir / "bg" : dir;
  std::vector<BackgroundSource> out;
  for (const auto& p : sorted_pngs(d)) out.push_back({p.stem().string(), png::read_rgb(p)});
  if (out.empty()) throw InvalidInput("no backgrounds under " + d.string());
  return out;
}

}  // namespace unimatte
