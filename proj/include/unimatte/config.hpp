// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Run configuration as a `key = value` document ('#' starts a comment).
// Precedence: file < UNIMATTE_<KEY> environment variables < command-line flags.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unimatte/interactions.hpp"
#include "unimatte/model.hpp"
#include "unimatte/training.hpp"

namespace unimatte {

class KeyValueConfig {
 public:
  /// Every key accepted in files, environment and --set flags.
  static const std::vector<std::string>& known_keys();

  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig from_file(const std::filesystem::path& path);

  /// Applies UNIMATTE_<KEY> (upper-case key) for every known key present in `env`.
  void apply_environment(const std::map<std::string, std::string>& env);
  /// Same, reading the process environment.
  void apply_process_environment();

  /// Throws InvalidInput for unknown keys.
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  /// Sorted `key=value` lines; the basis of the config hash.
  std::string canonical() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

TrainConfig train_config_from(const KeyValueConfig& kv, TrainStage stage);

/// model_profile = toy | desk | full, optionally overridden by stage_widths = "8,16,32,64".
ModelConfig model_config_from(const KeyValueConfig& kv, InteractionKind kind);

SimulationOptions simulation_options_from(const KeyValueConfig& kv);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

struct RunStamp {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string corpus_hash;  // of the manifest bytes; empty when no corpus is involved
  std::string kernels;      // active kernel ISA
  std::map<std::string, std::string> extra;
};

/// Hash of a manifest file's bytes, or "" when the file is absent.
std::string corpus_hash(const std::filesystem::path& manifest_path);

std::string stamp_to_json(const RunStamp& s);
void write_stamp(const std::filesystem::path& path, const RunStamp& s);

}  // namespace unimatte
