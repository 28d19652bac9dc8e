// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "unimatte/datasets.hpp"
#include "unimatte/interactions.hpp"
#include "unimatte/model.hpp"
#include "unimatte/schedule.hpp"

namespace unimatte {

enum class TrainStage { pretrain, main };

struct TrainConfig {
  TrainStage stage = TrainStage::main;
  double base_lr = 4e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double lambda = 1.0;
  double poly_power = 0.9;
  std::int64_t warmup_iters = 5000;
  /// Iterations; 0 derives them from epochs (epochs x batches per epoch).
  std::int64_t max_iters = 0;
  int epochs = 120;
  int batch_size = 8;
  int group_size = 2;    // pretraining: composites per shared foreground
  int batch_groups = 4;  // pretraining: groups per batch
  bool augment = true;
  AugmentConfig augment_cfg;
  std::int64_t snapshot_every = 0;  // 0 disables periodic snapshots
  std::uint64_t seed = 0;

  /// Hyperparameter echo stored in checkpoints.
  std::string to_json() const;
  void validate() const;
};

/// One minibatch after augmentation and interaction simulation.
struct Batch {
  std::vector<Image> images;
  std::vector<Alpha> alphas;
  std::vector<GuidanceMap> guidance;
  /// Pretraining only: batch indices sharing a foreground.
  std::vector<std::vector<int>> groups;

  std::size_t size() const { return images.size(); }
};

struct LossParts {
  double ce = 0, l1 = 0, final_loss = 0, cons = 0;
};

/// Forward + loss_final (+ backward into the model's parameter grads when requested).
LossParts batch_loss(Model& model, const Batch& batch, double lambda, bool backward);

/// Consistency loss of the deepest encoder stage over batch.groups.
LossParts batch_consistency(Model& model, const Batch& batch, bool backward);

/// Produces the batch for a given step; deterministic in (seed, step).
using BatchSource = std::function<Batch(std::int64_t step)>;

/// Loss NaN or Inf during training. The last checkpoint written is kept.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceRow {
  std::int64_t step;
  double lr;
  LossParts loss;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  std::int64_t steps = 0;
};

struct TrainHooks {
  /// Called every snapshot_every steps and after the final step.
  std::function<void(std::int64_t step, Model& model)> on_snapshot;
  /// If set, checkpoints are written here at every snapshot and at the end.
  std::filesystem::path checkpoint_path;
  /// Checked after each periodic snapshot; returning true ends training there.
  std::function<bool(std::int64_t step, Model& model)> stop_early;
};

/// Warm-up + cosine schedule, loss_final, Adam over all parameters.
TrainResult train_loop(Model& model, const TrainConfig& cfg, std::int64_t iters,
                       const BatchSource& source, const TrainHooks& hooks = {});

/// Poly schedule, consistency loss, Adam over encoder parameters only.
TrainResult pretrain_loop(Model& model, const TrainConfig& cfg, std::int64_t iters,
                          const BatchSource& source, const TrainHooks& hooks = {});

/// Samples loaded from a corpus once and served as augmented, guided batches.
class CorpusSampler {
 public:
  CorpusSampler(std::filesystem::path root, Manifest manifest, InteractionKind kind,
                TrainConfig cfg, SimulationOptions sim = {});

  const Manifest& manifest() const { return manifest_; }
  std::size_t samples() const { return loaded_.size(); }

  /// Main-stage minibatch: records drawn by a per-epoch seeded permutation.
  Batch main_batch(std::int64_t step) const;
  /// Pretraining minibatch following fc_group_batches; each group shares one set of
  /// geometric augmentation parameters and one simulated interaction.
  Batch pretrain_batch(std::int64_t step) const;
  std::int64_t batches_per_epoch(TrainStage stage) const;

  /// Builds one augmented sample with simulated guidance.
  void make_sample(std::size_t record, std::uint64_t seed, bool allow_combine, Batch& out,
                   const AugmentParams* shared = nullptr) const;

 private:
  std::filesystem::path root_;
  Manifest manifest_;
  InteractionKind kind_;
  TrainConfig cfg_;
  SimulationOptions sim_;
  std::vector<LoadedSample> loaded_;
};

/// Writes step,lr,loss_ce,loss_l1,loss_final,loss_cons.
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

/// Derived iteration count for a stage.
std::int64_t resolve_iters(const TrainConfig& cfg, std::int64_t batches_per_epoch);

/// Full pipeline entry points used by the CLI.
TrainResult pretrain_fc(const TrainConfig& cfg, const std::filesystem::path& root,
                        const Manifest& manifest, Model& model, InteractionKind kind,
                        const TrainHooks& hooks = {});
TrainResult train_main(const TrainConfig& cfg, const std::filesystem::path& root,
                       const Manifest& manifest, Model& model, InteractionKind kind,
                       const TrainHooks& hooks = {});

}  // namespace unimatte
