// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// 8-bit PNG I/O. Values are normalized as byte/255 on read and written as
// round(255 * clamp(v, 0, 1)). Trimaps use the gray levels 0/128/255.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "unimatte/field.hpp"

namespace unimatte::png {

using Bytes = std::vector<std::uint8_t>;

Image decode_rgb(std::span<const std::uint8_t> bytes);
Plane decode_gray(std::span<const std::uint8_t> bytes);

Bytes encode_rgb(const Image& image);
Bytes encode_gray(std::span<const double> values, int height, int width);

template <typename Tag>
Bytes encode_gray(const Field<double, Tag>& field) {
  return encode_gray(field.values(), field.height(), field.width());
}

Image read_rgb(const std::filesystem::path& path);
Alpha read_alpha(const std::filesystem::path& path);
Trimap read_trimap(const std::filesystem::path& path);

void write_rgb(const std::filesystem::path& path, const Image& image);
void write_gray(const std::filesystem::path& path, std::span<const double> values, int height,
                int width);
void write_alpha(const std::filesystem::path& path, const Alpha& alpha);
void write_trimap(const std::filesystem::path& path, const Trimap& trimap);

/// 8-bit quantization used by the writers.
std::uint8_t to_byte(double v);

/// Snap a gray value to the nearest trimap level.
double trimap_level(double v);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace unimatte::png
