// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

namespace unimatte::png {
namespace {

// Decode into 8-bit samples of the requested libpng format.
std::vector<std::uint8_t> decode_raw(std::span<const std::uint8_t> bytes, std::uint32_t format,
                                     int& height, int& width) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw FormatError(std::string("png decode: ") + img.message);
  img.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw FormatError(std::string("png decode: ") + img.message);
  }
  height = static_cast<int>(img.height);
  width = static_cast<int>(img.width);
  if (height < 1 || width < 1) throw FormatError("png decode: empty image");
  return buf;
}

Bytes encode_raw(const std::uint8_t* pixels, int height, int width, std::uint32_t format,
                 int channels) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  png_alloc_size_t size = 0;
  const png_int_32 stride = width * channels;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels, stride, nullptr))
    throw FormatError(std::string("png encode: ") + img.message);
  Bytes out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels, stride, nullptr))
    throw FormatError(std::string("png encode: ") + img.message);
  out.resize(size);
  return out;
}

}  // namespace

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

double trimap_level(double v) {
  if (v < 0.25) return kTrimapBackground;
  if (v > 0.75) return kTrimapForeground;
  return kTrimapUnknown;
}

Image decode_rgb(std::span<const std::uint8_t> bytes) {
  int h = 0, w = 0;
  const auto raw = decode_raw(bytes, PNG_FORMAT_RGB, h, w);
  Image out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch)
        out(ch, r, c) = raw[(static_cast<std::size_t>(r) * w + c) * 3 + ch] / 255.0;
  return out;
}

Plane decode_gray(std::span<const std::uint8_t> bytes) {
  int h = 0, w = 0;
  const auto raw = decode_raw(bytes, PNG_FORMAT_GRAY, h, w);
  Plane out(h, w);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = raw[i] / 255.0;
  return out;
}

Bytes encode_rgb(const Image& image) {
  const int h = image.height(), w = image.width();
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(h) * w * 3);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch)
        raw[(static_cast<std::size_t>(r) * w + c) * 3 + ch] = to_byte(image(ch, r, c));
  return encode_raw(raw.data(), h, w, PNG_FORMAT_RGB, 3);
}

Bytes encode_gray(std::span<const double> values, int height, int width) {
  if (values.size() != static_cast<std::size_t>(height) * width)
    throw ShapeError("png encode: value count does not match dimensions");
  std::vector<std::uint8_t> raw(values.size());
  std::transform(values.begin(), values.end(), raw.begin(), to_byte);
  return encode_raw(raw.data(), height, width, PNG_FORMAT_GRAY, 1);
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image read_rgb(const std::filesystem::path& path) { return decode_rgb(read_file(path)); }

Alpha read_alpha(const std::filesystem::path& path) {
  return field_cast<Alpha>(decode_gray(read_file(path)));
}

Trimap read_trimap(const std::filesystem::path& path) {
  Trimap t = field_cast<Trimap>(decode_gray(read_file(path)));
  for (double& v : t.values()) v = trimap_level(v);
  return t;
}

void write_rgb(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_rgb(image));
}

void write_gray(const std::filesystem::path& path, std::span<const double> values, int height,
                int width) {
  write_file(path, encode_gray(values, height, width));
}

void write_alpha(const std::filesystem::path& path, const Alpha& alpha) {
  write_gray(path, alpha.values(), alpha.height(), alpha.width());
}

void write_trimap(const std::filesystem::path& path, const Trimap& trimap) {
  // 0.5 * 255 rounds to 128.
  write_gray(path, trimap.values(), trimap.height(), trimap.width());
}

}  // namespace unimatte::png
