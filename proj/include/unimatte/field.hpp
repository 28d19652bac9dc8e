// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unimatte/error.hpp"

namespace unimatte {

/// Row-major 2-D pixel field. The tag makes Alpha, Trimap, masks and generic
/// real planes distinct types that cannot be swapped by accident.
template <typename T, typename Tag>
class Field {
 public:
  using value_type = T;

  Field() = default;
  Field(int height, int width, T fill = T{}) : height_(height), width_(width) {
    if (height < 1 || width < 1) throw ShapeError("field dimensions must be >= 1");
    values_.assign(static_cast<std::size_t>(height) * width, fill);
  }
  Field(int height, int width, std::vector<T> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (height < 1 || width < 1) throw ShapeError("field dimensions must be >= 1");
    if (values_.size() != static_cast<std::size_t>(height) * width)
      throw ShapeError("field value count does not match dimensions");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  const T& operator()(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  bool contains(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  template <typename U, typename OtherTag>
  bool same_shape(const Field<U, OtherTag>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const Field& a, const Field& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.values_ == b.values_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> values_;
};

struct PlaneTag {};
struct AlphaTag {};
struct MaskTag {};
struct TrimapTag {};

/// Generic real-valued field (distances, score maps, ...).
using Plane = Field<double, PlaneTag>;
/// Opacity in [0,1].
using Alpha = Field<double, AlphaTag>;
/// Values exactly 0 or 1.
using BinaryMask = Field<std::uint8_t, MaskTag>;
/// Levels 0 (background), 0.5 (unknown), 1 (foreground).
using Trimap = Field<double, TrimapTag>;

inline constexpr double kTrimapBackground = 0.0;
inline constexpr double kTrimapUnknown = 0.5;
inline constexpr double kTrimapForeground = 1.0;

/// Reinterpret a field under a different tag (values copied unchanged).
template <typename To, typename T, typename Tag>
To field_cast(const Field<T, Tag>& f) {
  using U = typename To::value_type;
  std::vector<U> v(f.values().begin(), f.values().end());
  return To(f.height(), f.width(), std::move(v));
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": dimension mismatch");
}

/// Three-channel image, planar storage (channel-major), values in [0,1].
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, double fill = 0.0) : height_(height), width_(width) {
    if (height < 1 || width < 1) throw ShapeError("image dimensions must be >= 1");
    values_.assign(static_cast<std::size_t>(kChannels) * height * width, fill);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return kChannels; }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }

  double& operator()(int channel, int row, int col) {
    return values_[channel * plane_size() + static_cast<std::size_t>(row) * width_ + col];
  }
  double operator()(int channel, int row, int col) const {
    return values_[channel * plane_size() + static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<double> channel(int c) { return {values_.data() + c * plane_size(), plane_size()}; }
  std::span<const double> channel(int c) const {
    return {values_.data() + c * plane_size(), plane_size()};
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  template <typename U, typename Tag>
  bool same_shape(const Field<U, Tag>& f) const {
    return height_ == f.height() && width_ == f.width();
  }
  bool same_shape(const Image& o) const { return height_ == o.height_ && width_ == o.width_; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.values_ == b.values_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

/// Binarization threshold for mask ground truth; 0 by default.
class MaskThreshold {
 public:
  constexpr MaskThreshold() = default;
  explicit MaskThreshold(double value) : value_(value) {
    if (!(value >= 0.0 && value < 1.0)) throw InvalidInput("mask threshold must lie in [0,1)");
  }
  constexpr double value() const { return value_; }

 private:
  double value_ = 0.0;
};

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Inclusive pixel rectangle.
struct Box {
  int r0 = 0, c0 = 0, r1 = 0, c1 = 0;
  bool contains(int row, int col) const { return row >= r0 && row <= r1 && col >= c0 && col <= c1; }
  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace unimatte
