// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Wire format shared by the CLI, the HTTP service and the browser UI:
//
//   {"kind":"bbox","box":[r0,c0,r1,c1]}
//   {"kind":"fg_point","points":[[row,col,role]]}          role: 1 fg, 0 bg
//   {"kind":"scribble","stroke":[[row,col_start,run_length],...]}
//   {"kind":"trimap","trimap":"<path or data:image/png;base64,...>"}
//
// Only the geometry key of the kind is emitted; keys appear in the order above.

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "unimatte/interactions.hpp"

namespace unimatte {

/// Resolves a trimap PNG reference into pixels.
using TrimapResolver = std::function<Trimap(std::string_view ref)>;

/// Accepts "data:image/png;base64,..." and filesystem paths.
Trimap resolve_trimap_reference(std::string_view ref);

std::string interaction_to_json(const Interaction& it);

/// Throws InvalidInput with a "field: message" description on malformed input.
/// Geometry bounds are not checked here; use validate() once the image size is known.
Interaction interaction_from_json(std::string_view text,
                                  const TrimapResolver& resolver = resolve_trimap_reference);

/// Run-length encoding of a raster-ordered pixel set as (row, col_start, length).
std::vector<std::array<int, 3>> encode_runs(std::vector<Pixel> pixels);
std::vector<Pixel> decode_runs(const std::vector<std::array<int, 3>>& runs);

}  // namespace unimatte
