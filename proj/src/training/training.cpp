// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "json.hpp"
#include "unimatte/checkpoint.hpp"
#include "unimatte/error.hpp"
#include "unimatte/imaging.hpp"
#include "unimatte/rng.hpp"

namespace unimatte {

using nn::Graph;
using nn::NodeId;
using nn::Shape;
using nn::Tensor;

std::string TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["stage"] = stage == TrainStage::pretrain ? "pretrain" : "main";
  j["base_lr"] = base_lr;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["lambda"] = lambda;
  j["poly_power"] = poly_power;
  j["warmup_iters"] = warmup_iters;
  j["max_iters"] = max_iters;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["group_size"] = group_size;
  j["batch_groups"] = batch_groups;
  j["augment"] = augment;
  j["crop"] = augment_cfg.crop;
  j["seed"] = seed;
  return j.dump();
}

void TrainConfig::validate() const {
  if (!(base_lr > 0)) throw InvalidInput("train: base_lr must be > 0");
  if (!(lambda >= 0)) throw InvalidInput("train: lambda must be >= 0");
  if (warmup_iters < 0) throw InvalidInput("train: warmup_iters must be >= 0");
  if (batch_size < 1) throw InvalidInput("train: batch_size must be >= 1");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1))
    throw InvalidInput("train: adam betas must lie in [0,1)");
  if (max_iters < 0 || epochs < 0) throw InvalidInput("train: iteration counts must be >= 0");
}

// ---------------------------------------------------------------------------

namespace {

Tensor stack_planes(const std::vector<Alpha>& planes, bool binarize) {
  const int h = planes[0].height(), w = planes[0].width();
  Tensor t(Shape{static_cast<int>(planes.size()), 1, h, w});
  for (std::size_t n = 0; n < planes.size(); ++n) {
    if (planes[n].height() != h || planes[n].width() != w)
      throw ShapeError("batch: alpha sizes differ");
    double* dst = t.plane(static_cast<int>(n), 0);
    const auto v = planes[n].values();
    for (std::size_t i = 0; i < v.size(); ++i) dst[i] = binarize ? (v[i] > 0.0 ? 1.0 : 0.0) : v[i];
  }
  return t;
}

Tensor batch_input(const Batch& b) {
  if (b.size() == 0 || b.alphas.size() != b.size() || b.guidance.size() != b.size())
    throw InvalidInput("batch: images, alphas and guidance must have equal nonzero counts");
  std::vector<const Image*> im;
  std::vector<const GuidanceMap*> gm;
  for (std::size_t i = 0; i < b.size(); ++i) {
    im.push_back(&b.images[i]);
    gm.push_back(&b.guidance[i]);
  }
  return make_input(im, gm);
}

bool finite(const LossParts& l) {
  return std::isfinite(l.ce) && std::isfinite(l.l1) && std::isfinite(l.final_loss) &&
         std::isfinite(l.cons);
}

void snapshot(Model& model, const TrainConfig& cfg, const TrainHooks& hooks, std::int64_t step,
              const char* stage, const std::string& prefix) {
  if (!hooks.checkpoint_path.empty())
    save_checkpoint(hooks.checkpoint_path, model, {static_cast<std::uint64_t>(step), stage, cfg.to_json()},
                    prefix);
  if (hooks.on_snapshot) hooks.on_snapshot(step, model);
}

}  // namespace

LossParts batch_loss(Model& model, const Batch& batch, double lambda, bool backward) {
  if (!(lambda >= 0)) throw InvalidInput("loss_final: lambda must be >= 0");
  Graph g;
  const ForwardNodes f = model.forward(g, g.input(batch_input(batch)));
  const NodeId ce = g.bce(f.mask_prob, stack_planes(batch.alphas, true));
  const NodeId l1 = g.l1(f.alpha, stack_planes(batch.alphas, false));
  const NodeId total = g.combine(ce, 1.0, l1, lambda);
  LossParts out{g.value(ce).data[0], g.value(l1).data[0], g.value(total).data[0], 0.0};
  if (backward) {
    model.params().zero_grad();
    g.backward(total);
  }
  return out;
}

LossParts batch_consistency(Model& model, const Batch& batch, bool backward) {
  if (batch.groups.empty()) throw InvalidInput("pretraining batch has no foreground groups");
  Graph g;
  const Pyramid p = model.encoder_forward(g, g.input(batch_input(batch)));
  const NodeId cons = g.consistency(p.stages.back(), batch.groups);
  LossParts out;
  out.cons = g.value(cons).data[0];
  if (backward) {
    model.params().zero_grad();
    g.backward(cons);
  }
  return out;
}

TrainResult train_loop(Model& model, const TrainConfig& cfg, std::int64_t iters,
                       const BatchSource& source, const TrainHooks& hooks) {
  cfg.validate();
  if (iters < 1) throw InvalidInput("train: need at least one iteration");
  Adam adam({cfg.beta1, cfg.beta2, 1e-8});
  const std::int64_t warmup = std::min(cfg.warmup_iters, iters);
  TrainResult res;
  for (std::int64_t step = 0; step < iters; ++step) {
    const double lr = lr_warmup_cosine(step, warmup, iters, cfg.base_lr);
    const LossParts l = batch_loss(model, source(step), cfg.lambda, true);
    if (!finite(l))
      throw TrainingDiverged("loss became non-finite at step " + std::to_string(step));
    adam.step(model.params(), lr);
    res.trace.push_back({step, lr, l});
    res.steps = step + 1;
    if (cfg.snapshot_every > 0 && (step + 1) % cfg.snapshot_every == 0 && step + 1 < iters) {
      snapshot(model, cfg, hooks, step + 1, "main", "");
      if (hooks.stop_early && hooks.stop_early(step + 1, model)) return res;
    }
  }
  snapshot(model, cfg, hooks, iters, "main", "");
  return res;
}

TrainResult pretrain_loop(Model& model, const TrainConfig& cfg, std::int64_t iters,
                          const BatchSource& source, const TrainHooks& hooks) {
  cfg.validate();
  if (iters < 1) throw InvalidInput("pretrain: need at least one iteration");
  Adam adam({cfg.beta1, cfg.beta2, 1e-8});
  TrainResult res;
  for (std::int64_t step = 0; step < iters; ++step) {
    const double lr = lr_poly(step, iters, cfg.base_lr, cfg.poly_power);
    const LossParts l = batch_consistency(model, source(step), true);
    if (!finite(l))
      throw TrainingDiverged("consistency loss became non-finite at step " + std::to_string(step));
    adam.step(model.params(), lr, "encoder.");
    res.trace.push_back({step, lr, l});
    res.steps = step + 1;
    if (cfg.snapshot_every > 0 && (step + 1) % cfg.snapshot_every == 0 && step + 1 < iters) {
      snapshot(model, cfg, hooks, step + 1, "pretrain", "encoder.");
      if (hooks.stop_early && hooks.stop_early(step + 1, model)) return res;
    }
  }
  snapshot(model, cfg, hooks, iters, "pretrain", "encoder.");
  return res;
}

// ---------------------------------------------------------------------------

CorpusSampler::CorpusSampler(std::filesystem::path root, Manifest manifest, InteractionKind kind,
                             TrainConfig cfg, SimulationOptions sim)
    : root_(std::move(root)), manifest_(std::move(manifest)), kind_(kind), cfg_(std::move(cfg)),
      sim_(sim) {
  if (manifest_.records.empty()) throw InvalidInput("training manifest is empty");
  for (const auto& r : manifest_.records) loaded_.push_back(load_sample(root_, r));
}

void CorpusSampler::make_sample(std::size_t record, std::uint64_t seed, bool allow_combine,
                                Batch& out, const AugmentParams* shared) const {
  const LoadedSample& s = loaded_.at(record);
  TrainingSample ts;
  bool ok = false;
  for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
    AugmentParams p = AugmentParams::identity();
    if (cfg_.augment) {
      p = shared && attempt == 0 ? *shared
                                 : draw_augment_params(cfg_.augment_cfg, loaded_.size(),
                                                       derive_seed(seed, 100 + attempt));
      if (!allow_combine) p.combine = false;
    }
    ts = apply_augment(s, p.combine ? &loaded_[p.partner] : nullptr, p, cfg_.augment_cfg);
    ok = count_ones(binarize_alpha(ts.alpha)) > 0;
  }
  if (!ok) {
    AugmentParams p = AugmentParams::identity();
    ts = apply_augment(s, nullptr, p, cfg_.augment_cfg);
  }
  const Interaction it = simulate(kind_, ts.alpha, derive_seed(seed, 1), sim_);
  out.guidance.push_back(
      encode_guidance(it, ts.alpha.height(), ts.alpha.width(), sim_.point_sigma));
  out.images.push_back(std::move(ts.image));
  out.alphas.push_back(std::move(ts.alpha));
}

std::int64_t CorpusSampler::batches_per_epoch(TrainStage stage) const {
  if (stage == TrainStage::pretrain)
    return static_cast<std::int64_t>(
        fc_group_batches(manifest_, cfg_.group_size, cfg_.batch_groups, cfg_.seed).size());
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(loaded_.size()) / cfg_.batch_size);
}

Batch CorpusSampler::main_batch(std::int64_t step) const {
  const std::int64_t bpe = batches_per_epoch(TrainStage::main);
  const std::int64_t epoch = step / bpe, pos = step % bpe;
  std::vector<std::size_t> perm(loaded_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(derive_seed(cfg_.seed, static_cast<std::uint64_t>(epoch)));
  rng.shuffle(perm.begin(), perm.end());
  Batch b;
  for (int i = 0; i < cfg_.batch_size; ++i) {
    const std::size_t k = (static_cast<std::size_t>(pos) * cfg_.batch_size + i) % perm.size();
    make_sample(perm[k], derive_seed(cfg_.seed ^ 0x5eedull, static_cast<std::uint64_t>(step) * 4096 + i),
                true, b);
  }
  return b;
}

Batch CorpusSampler::pretrain_batch(std::int64_t step) const {
  const BatchPlan plan0 = fc_group_batches(manifest_, cfg_.group_size, cfg_.batch_groups, cfg_.seed);
  const std::int64_t bpe = static_cast<std::int64_t>(plan0.size());
  const std::int64_t epoch = step / bpe, pos = step % bpe;
  const BatchPlan plan =
      epoch == 0 ? plan0
                 : fc_group_batches(manifest_, cfg_.group_size, cfg_.batch_groups,
                                    derive_seed(cfg_.seed, static_cast<std::uint64_t>(epoch)));
  Batch b;
  const auto& groups = plan[static_cast<std::size_t>(pos)];
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const std::uint64_t gseed =
        derive_seed(cfg_.seed ^ 0xfcull, static_cast<std::uint64_t>(step) * 4096 + gi);
    AugmentParams shared = draw_augment_params(cfg_.augment_cfg, loaded_.size(), gseed);
    shared.combine = false;
    std::vector<int> members;
    for (std::size_t rec : groups[gi]) {
      members.push_back(static_cast<int>(b.size()));
      make_sample(rec, gseed, false, b, &shared);
    }
    b.groups.push_back(std::move(members));
  }
  return b;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "step,lr,loss_ce,loss_l1,loss_final,loss_cons\n" << std::setprecision(10);
  for (const auto& r : trace)
    out << r.step << ',' << r.lr << ',' << r.loss.ce << ',' << r.loss.l1 << ','
        << r.loss.final_loss << ',' << r.loss.cons << '\n';
}

std::int64_t resolve_iters(const TrainConfig& cfg, std::int64_t batches_per_epoch) {
  if (cfg.max_iters > 0) return cfg.max_iters;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(cfg.epochs) * batches_per_epoch);
}

TrainResult pretrain_fc(const TrainConfig& cfg, const std::filesystem::path& root,
                        const Manifest& manifest, Model& model, InteractionKind kind,
                        const TrainHooks& hooks) {
  // Rejects manifests without shared-foreground groups before any pixel is loaded.
  fc_group_batches(manifest, cfg.group_size, cfg.batch_groups, cfg.seed);
  const CorpusSampler sampler(root, manifest, kind, cfg);
  const std::int64_t iters = resolve_iters(cfg, sampler.batches_per_epoch(TrainStage::pretrain));
  return pretrain_loop(model, cfg, iters,
                       [&](std::int64_t step) { return sampler.pretrain_batch(step); }, hooks);
}

TrainResult train_main(const TrainConfig& cfg, const std::filesystem::path& root,
                       const Manifest& manifest, Model& model, InteractionKind kind,
                       const TrainHooks& hooks) {
  if (model.config().guidance_kind != kind)
    throw InvalidInput("model guidance kind does not match the requested interaction");
  const CorpusSampler sampler(root, manifest, kind, cfg);
  const std::int64_t iters = resolve_iters(cfg, sampler.batches_per_epoch(TrainStage::main));
  return train_loop(model, cfg, iters, [&](std::int64_t step) { return sampler.main_batch(step); },
                    hooks);
}

}  // namespace unimatte
