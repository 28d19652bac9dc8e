// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

namespace unimatte {

template <typename Tag>
Field<double, Tag> resize_bilinear(const Field<double, Tag>& field, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ShapeError("resize_bilinear: output size must be >= 1");
  Field<double, Tag> out(out_h, out_w);
  resize_bilinear_plane(field.data(), field.height(), field.width(), out.data(), out_h, out_w);
  return out;
}

}  // namespace unimatte
