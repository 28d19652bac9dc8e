// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unimatte/datasets.hpp"
#include "unimatte/error.hpp"
#include "unimatte/imaging.hpp"
#include "unimatte/rng.hpp"

namespace unimatte {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Bilinear tap of a plane with zero outside the grid.
double sample_zero(const double* p, int h, int w, double y, double x) {
  const double fy = std::floor(y), fx = std::floor(x);
  const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
  const double ty = y - fy, tx = x - fx;
  auto at = [&](int r, int c) {
    return (r < 0 || c < 0 || r >= h || c >= w) ? 0.0 : p[static_cast<std::size_t>(r) * w + c];
  };
  return (1 - ty) * ((1 - tx) * at(y0, x0) + tx * at(y0, x0 + 1)) +
         ty * ((1 - tx) * at(y0 + 1, x0) + tx * at(y0 + 1, x0 + 1));
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0 ? d / mx : 0.0;
  if (d <= 0) {
    h = 0;
  } else if (mx == r) {
    h = std::fmod((g - b) / d + 6.0, 6.0) / 6.0;
  } else if (mx == g) {
    h = ((b - r) / d + 2.0) / 6.0;
  } else {
    h = ((r - g) / d + 4.0) / 6.0;
  }
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double hh = h * 6.0;
  const int i = static_cast<int>(std::floor(hh)) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (i) {
    case 0: r = v, g = t, b = p; break;
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    default: r = v, g = p, b = q; break;
  }
}

Alpha clamp_unit(Alpha a) {
  for (double& v : a.values()) v = std::clamp(v, 0.0, 1.0);
  return a;
}

}  // namespace

AugmentParams draw_augment_params(const AugmentConfig& cfg, std::size_t partner_pool,
                                  std::uint64_t seed) {
  Rng rng(seed);
  AugmentParams p;
  p.combine = rng.bernoulli(cfg.combine_probability) && partner_pool > 0;
  p.partner = partner_pool > 0 ? static_cast<std::size_t>(rng.uniform_int(0, partner_pool - 1)) : 0;
  p.rotation_deg = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg);
  p.scale = rng.uniform(cfg.min_scale, cfg.max_scale);
  p.shear_deg = rng.uniform(-cfg.max_shear_deg, cfg.max_shear_deg);
  p.crop_u = rng.uniform();
  p.crop_v = rng.uniform();
  p.hue = rng.uniform(-cfg.max_jitter, cfg.max_jitter);
  p.saturation = rng.uniform(-cfg.max_jitter, cfg.max_jitter);
  p.brightness = rng.uniform(-cfg.max_jitter, cfg.max_jitter);
  return p;
}

void combine_foregrounds(const Image& f1, const Alpha& a1, const Image& f2, const Alpha& a2,
                         Image& fg_out, Alpha& alpha_out) {
  require_same_shape(f1, a1, "combine");
  require_same_shape(f2, a2, "combine");
  require_same_shape(f1, f2, "combine");
  const int h = a1.height(), w = a1.width();
  fg_out = Image(h, w);
  alpha_out = Alpha(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double x1 = a1(r, c), x2 = a2(r, c) * (1.0 - a1(r, c));
      const double a = std::min(x1 + x2, 1.0);
      alpha_out(r, c) = a;
      for (int ch = 0; ch < 3; ++ch)
        fg_out(ch, r, c) = a > 0 ? (x1 * f1(ch, r, c) + x2 * f2(ch, r, c)) / a : 0.0;
    }
}

void affine_warp(const Image& fg, const Alpha& alpha, double rotation_deg, double scale,
                 double shear_deg, Image& fg_out, Alpha& alpha_out) {
  require_same_shape(fg, alpha, "affine_warp");
  if (rotation_deg == 0.0 && scale == 1.0 && shear_deg == 0.0) {
    fg_out = fg;
    alpha_out = alpha;
    return;
  }
  if (!(scale > 0)) throw InvalidInput("affine scale must be positive");
  // Forward map in (x, y): A = R(theta) * Shear * scale.
  const double ct = std::cos(rotation_deg * kDeg), st = std::sin(rotation_deg * kDeg);
  const double sh = std::tan(shear_deg * kDeg);
  const double a00 = scale * ct, a01 = scale * (ct * sh - st);
  const double a10 = scale * st, a11 = scale * (st * sh + ct);
  const double det = a00 * a11 - a01 * a10;
  const double i00 = a11 / det, i01 = -a01 / det, i10 = -a10 / det, i11 = a00 / det;

  const int h = alpha.height(), w = alpha.width();
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  fg_out = Image(h, w);
  alpha_out = Alpha(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double dx = c - cx, dy = r - cy;
      const double sx = i00 * dx + i01 * dy + cx, sy = i10 * dx + i11 * dy + cy;
      alpha_out(r, c) = std::clamp(sample_zero(alpha.data(), h, w, sy, sx), 0.0, 1.0);
      for (int ch = 0; ch < 3; ++ch)
        fg_out(ch, r, c) = sample_zero(fg.channel(ch).data(), h, w, sy, sx);
    }
}

Image color_jitter(const Image& image, double hue, double saturation, double brightness) {
  if (hue == 0.0 && saturation == 0.0 && brightness == 0.0) return image;
  Image out(image.height(), image.width());
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c) {
      double h, s, v;
      rgb_to_hsv(image(0, r, c), image(1, r, c), image(2, r, c), h, s, v);
      h = std::fmod(h + hue + 1.0, 1.0);
      s = std::clamp(s * (1.0 + saturation), 0.0, 1.0);
      v = std::clamp(v * (1.0 + brightness), 0.0, 1.0);
      hsv_to_rgb(h, s, v, out(0, r, c), out(1, r, c), out(2, r, c));
    }
  return out;
}

Pixel crop_origin(const Alpha& alpha, int crop, double u, double v) {
  const int h = alpha.height(), w = alpha.width();
  if (h < crop || w < crop) throw ShapeError("crop larger than frame");
  int lo_r = 0, hi_r = h - crop, lo_c = 0, hi_c = w - crop;
  if (const auto box = bounding_box(binarize_alpha(alpha))) {
    const int cr = (box->r0 + box->r1) / 2, cc = (box->c0 + box->c1) / 2;
    lo_r = std::max(0, cr - crop + 1);
    hi_r = std::min(h - crop, cr);
    lo_c = std::max(0, cc - crop + 1);
    hi_c = std::min(w - crop, cc);
  }
  return {lo_r + static_cast<int>(std::lround(std::clamp(u, 0.0, 1.0) * (hi_r - lo_r))),
          lo_c + static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * (hi_c - lo_c)))};
}

TrainingSample apply_augment(const LoadedSample& sample, const LoadedSample* partner,
                             const AugmentParams& p, const AugmentConfig& cfg) {
  if (cfg.crop < 1) throw InvalidInput("crop size must be >= 1");
  const int h = sample.alpha.height(), w = sample.alpha.width();
  Image fg = sample.fg;
  Alpha alpha = sample.alpha;
  bool modified = false;

  if (p.combine && partner != nullptr) {
    Image f2 = partner->fg;
    Alpha a2 = partner->alpha;
    if (!f2.same_shape(fg)) {
      f2 = resize_bilinear(f2, h, w);
      a2 = clamp_unit(resize_bilinear(a2, h, w));
    }
    Image cf;
    Alpha ca;
    combine_foregrounds(fg, alpha, f2, a2, cf, ca);
    fg = std::move(cf);
    alpha = std::move(ca);
    modified = true;
  }
  if (p.rotation_deg != 0.0 || p.scale != 1.0 || p.shear_deg != 0.0) {
    Image wf;
    Alpha wa;
    affine_warp(fg, alpha, p.rotation_deg, p.scale, p.shear_deg, wf, wa);
    fg = std::move(wf);
    alpha = std::move(wa);
    modified = true;
  }
  Image image = modified ? composite(fg, sample.bg, alpha) : sample.composite;

  if (h < cfg.crop || w < cfg.crop) {
    const double s = static_cast<double>(cfg.crop) / std::min(h, w);
    const int nh = std::max(cfg.crop, static_cast<int>(std::ceil(h * s))),
              nw = std::max(cfg.crop, static_cast<int>(std::ceil(w * s)));
    image = resize_bilinear(image, nh, nw);
    alpha = clamp_unit(resize_bilinear(alpha, nh, nw));
  }
  const Pixel o = crop_origin(alpha, cfg.crop, p.crop_u, p.crop_v);
  TrainingSample out{Image(cfg.crop, cfg.crop), Alpha(cfg.crop, cfg.crop)};
  for (int r = 0; r < cfg.crop; ++r)
    for (int c = 0; c < cfg.crop; ++c) {
      out.alpha(r, c) = alpha(o.row + r, o.col + c);
      for (int ch = 0; ch < 3; ++ch) out.image(ch, r, c) = image(ch, o.row + r, o.col + c);
    }
  out.image = color_jitter(out.image, p.hue, p.saturation, p.brightness);
  return out;
}

}  // namespace unimatte
