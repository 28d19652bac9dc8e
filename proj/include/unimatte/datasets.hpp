// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Corpus construction. A corpus root holds
//
//   {root}/fg/<id>.png  {root}/alpha/<id>.png  {root}/bg/<id>.png
//   {root}/composite/<sample>.png  {root}/manifest.jsonl
//
// where every manifest line is one SampleRecord. Paths inside records are
// relative to the root.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unimatte/field.hpp"
#include "unimatte/taxonomy.hpp"

namespace unimatte {

enum class Split { train, test };

std::string_view to_string(Split s);

struct SampleRecord {
  std::string sample_id;
  std::vector<std::string> fg_ids;  // target first, then distractors
  std::string bg_id;
  std::string fg_path;
  std::string alpha_path;
  std::string bg_path;  // background the target is composited over
  std::string composite_path;
  Category category = Category::SO;
  int object_count = 1;
  Split split = Split::train;
};

struct Manifest {
  Split split = Split::train;
  std::vector<SampleRecord> records;

  std::array<std::size_t, 4> category_counts() const;
  std::size_t count(Category c) const { return category_counts()[static_cast<int>(c)]; }
};

std::string record_to_json_line(const SampleRecord& r);
SampleRecord record_from_json_line(std::string_view line);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
/// Throws FormatError on malformed lines and InvalidInput on duplicate sample ids.
Manifest read_manifest(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// In-memory sources

struct ForegroundSource {
  std::string id;
  Image fg;
  Alpha alpha;
};

struct BackgroundSource {
  std::string id;
  Image image;
};

enum class Opacity { opaque, transparent };

/// Procedural foreground: a star-shaped textured blob. Opaque blobs have
/// anti-aliased one-pixel edges; transparent ones carry interior alpha in
/// roughly [0.3, 0.8].
ForegroundSource generate_foreground(const std::string& id, Opacity opacity, int size,
                                     std::uint64_t seed);

/// Procedural background: smooth gradients plus band-limited texture.
BackgroundSource generate_background(const std::string& id, int size, std::uint64_t seed);

/// Writes fg/<id>.png, alpha/<id>.png and bg/<id>.png under dir.
void write_sources(const std::filesystem::path& dir, std::span<const ForegroundSource> fgs,
                   std::span<const BackgroundSource> bgs);
std::vector<ForegroundSource> read_foregrounds(const std::filesystem::path& dir);
std::vector<BackgroundSource> read_backgrounds(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Composition-1K style training corpora

struct CompositePlanEntry {
  std::size_t fg_index = 0;
  std::size_t bg_index = 0;
  std::string sample_id;
};

/// M * per_fg (foreground, background) pairs; backgrounds are drawn without
/// replacement within each foreground. Throws when per_fg exceeds num_bg or is < 1.
std::vector<CompositePlanEntry> plan_composites(std::size_t num_fg, std::size_t num_bg,
                                                int per_fg, std::uint64_t seed);

/// Renders the plan into `root` and returns (and writes) its manifest.
Manifest build_composites(std::span<const ForegroundSource> fgs,
                          std::span<const BackgroundSource> bgs, int per_fg, std::uint64_t seed,
                          const std::filesystem::path& root, Split split = Split::train);

// ---------------------------------------------------------------------------
// Unified test set with multi-object (non-salient) samples

struct UnifiedCounts {
  int so = 0, st = 0, nso = 0, nst = 0;
  int total() const { return so + st + nso + nst; }
  friend bool operator==(const UnifiedCounts&, const UnifiedCounts&) = default;
};

inline constexpr UnifiedCounts kUnifiedRatio{310, 140, 280, 75};

/// Parses "a:b:c:d".
UnifiedCounts parse_ratio(std::string_view text);

/// Throws InvalidInput unless counts are proportional to ratio.
void check_unified_ratio(const UnifiedCounts& counts, const UnifiedCounts& ratio = kUnifiedRatio);

/// ratio * scale, which must come out integral.
UnifiedCounts scale_ratio(const UnifiedCounts& ratio, double scale);

struct UnifiedSources {
  std::span<const ForegroundSource> so_fgs;  // opaque targets
  std::span<const ForegroundSource> st_fgs;  // transparent targets
  std::span<const ForegroundSource> so_bgs;  // opaque distractor objects
  std::span<const ForegroundSource> st_bgs;  // transparent distractor objects
  std::span<const BackgroundSource> backgrounds;
};

/// Salient samples place one target on a background; non-salient samples first
/// composite 1-2 distractor objects into the background, then the target on
/// top, so the target alpha remains exact ground truth. Every record's tag is
/// checked with classify_sample.
Manifest build_unified_testset(const UnifiedSources& src, const UnifiedCounts& counts,
                               std::uint64_t seed, const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// Loading and augmentation

struct LoadedSample {
  Image fg;
  Alpha alpha;
  Image bg;  // resized to the foreground size
  Image composite;
};

LoadedSample load_sample(const std::filesystem::path& root, const SampleRecord& r);

struct TrainingSample {
  Image image;
  Alpha alpha;
};

struct AugmentConfig {
  int crop = 64;  // 512 at full scale
  double combine_probability = 0.5;
  double max_rotation_deg = 30.0;
  double min_scale = 0.8, max_scale = 1.25;
  double max_shear_deg = 10.0;
  double max_jitter = 0.1;  // hue / saturation / brightness
};

struct AugmentParams {
  bool combine = false;
  std::size_t partner = 0;  // index into the partner pool when combine is set
  double rotation_deg = 0.0;
  double scale = 1.0;
  double shear_deg = 0.0;
  double crop_u = 0.5, crop_v = 0.5;  // crop position in [0,1] of the admissible range
  double hue = 0.0, saturation = 0.0, brightness = 0.0;

  static AugmentParams identity() { return {}; }
};

AugmentParams draw_augment_params(const AugmentConfig& cfg, std::size_t partner_pool,
                                  std::uint64_t seed);

/// Two-foreground combination: alpha = a1 + a2 (1 - a1), colors premultiplied-blended.
void combine_foregrounds(const Image& f1, const Alpha& a1, const Image& f2, const Alpha& a2,
                         Image& fg_out, Alpha& alpha_out);

/// Inverse-mapped affine warp about the image centre (rotation, scale, shear); bilinear,
/// zero outside the source. Identity parameters return the inputs unchanged.
void affine_warp(const Image& fg, const Alpha& alpha, double rotation_deg, double scale,
                 double shear_deg, Image& fg_out, Alpha& alpha_out);

/// HSV jitter: hue shift (fraction of a turn), relative saturation and value scaling.
Image color_jitter(const Image& image, double hue, double saturation, double brightness);

/// Combination -> affine -> composite -> crop -> color jitter. `partner` is used
/// only when params.combine is set. The crop window is chosen to keep the
/// support centre inside it; if the frame is smaller than the crop it is
/// resized first.
TrainingSample apply_augment(const LoadedSample& sample, const LoadedSample* partner,
                             const AugmentParams& params, const AugmentConfig& cfg);

/// Crop box (r0, c0) apply_augment would use for a given alpha and params.
Pixel crop_origin(const Alpha& alpha, int crop, double u, double v);

// ---------------------------------------------------------------------------
// Foreground-consistency batching

/// batches[b][g] is a group of `group_size` record indices sharing their target foreground.
using BatchPlan = std::vector<std::vector<std::vector<std::size_t>>>;

/// Each batch holds `batch_groups` groups; every record is used at most once.
/// Records that cannot fill a group, and groups that cannot fill a batch, are dropped.
BatchPlan fc_group_batches(const Manifest& m, int group_size, int batch_groups,
                           std::uint64_t seed);

}  // namespace unimatte
