// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unimatte::base64 {

std::string encode(std::span<const std::uint8_t> bytes);

/// Throws FormatError on characters outside the standard alphabet.
std::vector<std::uint8_t> decode(std::string_view text);

}  // namespace unimatte::base64
