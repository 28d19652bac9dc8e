// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "unimatte/config.hpp"
#include "unimatte/error.hpp"
#include "unimatte/png_io.hpp"

namespace unimatte {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string corpus_hash(const std::filesystem::path& manifest_path) {
  if (!std::filesystem::exists(manifest_path)) return "";
  const auto bytes = png::read_file(manifest_path);
  return hex64(fnv1a64({reinterpret_cast<const char*>(bytes.data()), bytes.size()}));
}

std::string stamp_to_json(const RunStamp& s) {
  nlohmann::ordered_json j;
  j["command"] = s.command;
  j["config_hash"] = s.config_hash;
  j["seed"] = s.seed;
  j["corpus_hash"] = s.corpus_hash;
  j["kernels"] = s.kernels;
  for (const auto& [k, v] : s.extra) j[k] = v;
  return j.dump(2);
}

void write_stamp(const std::filesystem::path& path, const RunStamp& s) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << stamp_to_json(s) << '\n';
}

}  // namespace unimatte
