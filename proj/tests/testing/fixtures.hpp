// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Shared random inputs and scratch directories for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "unimatte/field.hpp"
#include "unimatte/rng.hpp"

namespace unimatte::testing {

/// Alpha with a mix of exact 0, exact 1 and fractional values.
inline Alpha random_alpha(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Alpha a(h, w);
  for (double& v : a.values()) {
    const double u = rng.uniform();
    v = u < 0.3 ? 0.0 : u < 0.5 ? 1.0 : rng.uniform();
  }
  return a;
}

/// Spatially smooth alpha: a soft disk plus noise, clipped to [0,1].
inline Alpha smooth_alpha(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  const double cr = rng.uniform(0.3, 0.7) * h, cc = rng.uniform(0.3, 0.7) * w;
  const double rad = rng.uniform(0.2, 0.35) * std::min(h, w);
  Alpha a(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double d = std::hypot(r - cr, c - cc);
      const double v = std::clamp((rad - d) / 3.0 + 0.5 + 0.1 * (rng.uniform() - 0.5), 0.0, 1.0);
      a(r, c) = v;
    }
  return a;
}

inline Image random_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Image im(h, w);
  for (double& v : im.values()) v = rng.uniform();
  return im;
}

inline BinaryMask random_mask(int h, int w, double p, std::uint64_t seed) {
  Rng rng(seed);
  BinaryMask m(h, w);
  for (auto& v : m.values()) v = rng.bernoulli(p) ? 1 : 0;
  return m;
}

inline Alpha disk_alpha(int h, int w, double cr, double cc, double radius) {
  Alpha a(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) a(r, c) = std::hypot(r - cr, c - cc) <= radius ? 1.0 : 0.0;
  return a;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("unimatte_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace unimatte::testing
