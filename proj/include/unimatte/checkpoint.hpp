// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Binary checkpoint container (little-endian):
//
//   "UIMCKPT\0"  u32 version  u64 step
//   str stage  str model_config_json  str train_config_json
//   u32 count, then per parameter: str name, i32 shape[4], u64 n, f64 values[n]
//   u64 FNV-1a of everything before it
//
// where str is u32 length followed by bytes.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "unimatte/model.hpp"

namespace unimatte {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t step = 0;
  std::string stage;        // "init", "pretrain" or "main"
  std::string train_json;   // training hyperparameter echo
};

struct LoadedCheckpoint {
  ModelConfig config;
  CheckpointMeta meta;
  std::map<std::string, nn::Parameter> params;
};

/// Writes all parameters, or only those whose names start with `prefix`.
/// The file is written to a temporary sibling and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const CheckpointMeta& meta, const std::string& prefix = "");

/// Throws FormatError on a bad magic, version, truncation or checksum.
LoadedCheckpoint read_checkpoint(const std::filesystem::path& path);

/// Copies stored parameters into the model by name. With require_all, every model
/// parameter must be present. Shape mismatches always throw. Returns the count copied.
std::size_t apply_checkpoint(Model& model, const LoadedCheckpoint& ckpt, bool require_all);

/// read_checkpoint + a model built from its config with all parameters loaded.
Model load_model(const std::filesystem::path& path);

}  // namespace unimatte
