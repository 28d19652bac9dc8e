// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "testing/fixtures.hpp"
#include "unimatte/checkpoint.hpp"
#include "unimatte/config.hpp"
#include "unimatte/error.hpp"
#include "unimatte/losses.hpp"
#include "unimatte/png_io.hpp"
#include "unimatte/schedule.hpp"
#include "unimatte/training.hpp"

namespace unimatte {
namespace {

const double kLn2 = std::log(2.0);

TEST(Losses, CrossEntropyAtHalfIsLn2) {
  const std::vector<double> p(16, 0.5);
  std::vector<double> t(16, 0.0);
  for (int i = 0; i < 8; ++i) t[i] = 1;
  EXPECT_NEAR(loss_ce(p, t), kLn2, 1e-15);
}

TEST(Losses, CrossEntropyAtTargetIsNearZero) {
  const BinaryMask m = testing::random_mask(8, 8, 0.4, 3);
  Plane p(8, 8);
  for (std::size_t i = 0; i < p.values().size(); ++i) p.values()[i] = m.values()[i];
  EXPECT_LE(loss_ce(p, m), 1e-6);
  EXPECT_GE(loss_ce(p, m), 0.0);
}

TEST(Losses, CrossEntropyMatchesFormula) {
  Rng rng(4);
  std::vector<double> p(50), t(50);
  double want = 0;
  for (int i = 0; i < 50; ++i) {
    p[i] = rng.uniform();
    t[i] = rng.uniform() < 0.5;
    const double q = std::clamp(p[i], 1e-7, 1 - 1e-7);
    want -= t[i] * std::log(q) + (1 - t[i]) * std::log(1 - q);
  }
  EXPECT_NEAR(loss_ce(p, t), want / 50, 1e-13);
  EXPECT_THROW(loss_ce(std::vector<double>{0.5}, std::vector<double>{1, 0}), ShapeError);
}

TEST(Losses, L1FormulaAndTranslationInvariance) {
  const Alpha a = testing::random_alpha(10, 10, 1), b = testing::random_alpha(10, 10, 2);
  double want = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) want += std::fabs(a.values()[i] - b.values()[i]);
  EXPECT_NEAR(loss_l1(a, b), want / 100, 1e-15);
  EXPECT_EQ(loss_l1(a, a), 0.0);
  Alpha a2(10, 10), b2(10, 10);
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    a2.values()[i] = 0.5 * a.values()[i] + 0.25;
    b2.values()[i] = 0.5 * b.values()[i] + 0.25;
  }
  Alpha a3 = a2, b3 = b2;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    a3.values()[i] += 0.2;
    b3.values()[i] += 0.2;
  }
  EXPECT_NEAR(loss_l1(a2, b2), loss_l1(a3, b3), 1e-15);
}

TEST(Losses, FinalCombinesWithLambda) {
  const BinaryMask m = testing::random_mask(6, 6, 0.5, 8);
  Plane p(6, 6);
  for (double& v : p.values()) v = 0.5;
  const Alpha pred = testing::random_alpha(6, 6, 9), gt = testing::random_alpha(6, 6, 10);
  const double ce = loss_ce(p, m), l1 = loss_l1(pred, gt);
  EXPECT_NEAR(loss_final(p, m, pred, gt, 2.0), ce + 2.0 * l1, 1e-15);
  EXPECT_NEAR(loss_final(p, m, pred, gt, 0.0), ce, 1e-15);
  EXPECT_THROW(loss_final(p, m, pred, gt, -1.0), InvalidInput);
  // ce = 0.1, l1 = 0.5, lambda = 2 -> 1.1 as plain arithmetic of the definition
  EXPECT_NEAR(0.1 + 2.0 * 0.5, 1.1, 1e-15);
}

nn::Tensor random_feature(int c, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  nn::Tensor t(nn::Shape{1, c, h, w});
  for (double& v : t.data) v = rng.uniform(-2, 2);
  return t;
}

TEST(Losses, ConsistencyProperties) {
  const nn::Tensor a = random_feature(3, 4, 4, 1), b = random_feature(3, 4, 4, 2),
                   c = random_feature(3, 4, 4, 3);
  EXPECT_NEAR(loss_cons({a, a}), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(loss_cons({a, b}), loss_cons({b, a}));
  const double abc = loss_cons({a, b, c});
  EXPECT_NEAR(abc, (loss_cons({a, b}) + loss_cons({a, c}) + loss_cons({b, c})) / 3, 1e-14);
  EXPECT_GE(abc, 0.0);
  EXPECT_LE(abc, kLn2);
  EXPECT_THROW(loss_cons({a}), InvalidInput);
  EXPECT_THROW(loss_cons({a, random_feature(2, 4, 4, 5)}), ShapeError);
}

TEST(Losses, ConsistencyDisjointOneHotIsLn2) {
  // Large logits make the spatial softmax effectively one-hot on different pixels.
  nn::Tensor a(nn::Shape{1, 1, 2, 2}, -800.0), b(nn::Shape{1, 1, 2, 2}, -800.0);
  a.data[0] = 800;
  b.data[3] = 800;
  EXPECT_NEAR(loss_cons({a, b}), kLn2, 1e-12);
}

TEST(Schedule, PolyAnchors) {
  EXPECT_DOUBLE_EQ(lr_poly(0, 1000, 4e-4), 4e-4);
  EXPECT_EQ(lr_poly(1000, 1000, 4e-4), 0.0);
  EXPECT_NEAR(lr_poly(500, 1000, 4e-4), 4e-4 * std::pow(0.5, 0.9), 1e-18);
  EXPECT_NEAR(lr_poly(500, 1000, 4e-4), 2.144e-4, 5e-8);
  for (int i = 0; i <= 1000; i += 37) {
    const double lr = lr_poly(i, 1000, 4e-4);
    EXPECT_GE(lr, 0.0);
    EXPECT_LE(lr, 4e-4);
  }
}

TEST(Schedule, WarmupCosineAnchors) {
  const double base = 4e-4;
  EXPECT_EQ(lr_warmup_cosine(0, 100, 1100, base), 0.0);
  EXPECT_NEAR(lr_warmup_cosine(50, 100, 1100, base), base / 2, 1e-18);
  EXPECT_DOUBLE_EQ(lr_warmup_cosine(100, 100, 1100, base), base);
  EXPECT_NEAR(lr_warmup_cosine(600, 100, 1100, base), base / 2, 1e-18);
  EXPECT_NEAR(lr_warmup_cosine(1100, 100, 1100, base), 0.0, 1e-20);
  double prev = base;
  for (int i = 100; i <= 1100; i += 10) {
    const double lr = lr_warmup_cosine(i, 100, 1100, base);
    EXPECT_LE(lr, prev + 1e-20);
    EXPECT_GE(lr, 0.0);
    prev = lr;
  }
  EXPECT_DOUBLE_EQ(lr_warmup_cosine(0, 0, 10, base), base);
  EXPECT_THROW(lr_warmup_cosine(0, 20, 10, base), InvalidInput);
}

TEST(Adam, FirstStepMovesByLrTimesSign) {
  nn::ParamStore ps;
  nn::Parameter& p = ps.add("enc.w", {1, 1, 1, 3});
  p.value = {1.0, -1.0, 0.5};
  p.grad = {0.3, -2.0, 0.0};
  nn::Parameter& q = ps.add("dec.w", {1, 1, 1, 1});
  q.value = {7.0};
  q.grad = {1.0};
  Adam adam;
  EXPECT_EQ(adam.config().beta1, 0.5);
  EXPECT_EQ(adam.config().beta2, 0.999);
  adam.step(ps, 0.01, "enc.");
  // Bias-corrected first step: m_hat = g, v_hat = g^2.
  EXPECT_NEAR(ps.get("enc.w").value[0], 1.0 - 0.01 * 0.3 / (0.3 + 1e-8), 1e-12);
  EXPECT_NEAR(ps.get("enc.w").value[1], -1.0 + 0.01 * 2.0 / (2.0 + 1e-8), 1e-12);
  EXPECT_EQ(ps.get("enc.w").value[2], 0.5);
  EXPECT_EQ(ps.get("dec.w").value[0], 7.0);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, MatchesReferenceRecurrence) {
  nn::ParamStore ps;
  nn::Parameter& p = ps.add("w", {1, 1, 1, 1});
  p.value = {0.0};
  Adam adam({0.9, 0.99, 1e-8});
  double m = 0, v = 0, x = 0;
  for (int t = 1; t <= 5; ++t) {
    const double g = 0.1 * t - 0.25;
    ps.get("w").grad = {g};
    adam.step(ps, 0.1);
    m = 0.9 * m + 0.1 * g;
    v = 0.99 * v + 0.01 * g * g;
    x -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.99, t))) + 1e-8);
    EXPECT_NEAR(ps.get("w").value[0], x, 1e-12);
  }
}

// A small corpus sharing each foreground across several backgrounds.
struct DeskCorpus {
  testing::TempDir dir{"desk"};
  Manifest manifest;

  DeskCorpus(int fgs, int per_fg, int size) {
    std::vector<ForegroundSource> f;
    std::vector<BackgroundSource> b;
    for (int i = 0; i < fgs; ++i)
      f.push_back(generate_foreground("f" + std::to_string(i),
                                      i % 3 == 2 ? Opacity::transparent : Opacity::opaque, size, 70 + i));
    for (int i = 0; i < per_fg + 1; ++i) b.push_back(generate_background("b" + std::to_string(i), size, 90 + i));
    manifest = build_composites(f, b, per_fg, 5, dir.path());
  }
};

TrainConfig pretrain_cfg(std::int64_t iters) {
  TrainConfig cfg;
  cfg.stage = TrainStage::pretrain;
  cfg.max_iters = iters;
  cfg.group_size = 2;
  cfg.batch_groups = 2;
  cfg.augment_cfg.crop = 32;
  cfg.seed = 17;
  return cfg;
}

TEST(Pretrain, SameSeedGivesBitIdenticalCheckpoints) {
  DeskCorpus corpus(4, 2, 40);
  const TrainConfig cfg = pretrain_cfg(4);
  std::vector<png::Bytes> files;
  for (int run = 0; run < 2; ++run) {
    Model m(ModelConfig::toy(InteractionKind::bbox));
    m.init(1);
    TrainHooks hooks;
    hooks.checkpoint_path = corpus.dir.path() / ("run" + std::to_string(run) + ".ckpt");
    pretrain_fc(cfg, corpus.dir.path(), corpus.manifest, m, InteractionKind::bbox, hooks);
    files.push_back(png::read_file(hooks.checkpoint_path));
  }
  EXPECT_EQ(files[0], files[1]);
}

TEST(Pretrain, UpdatesEncoderOnly) {
  DeskCorpus corpus(4, 2, 40);
  Model m(ModelConfig::toy(InteractionKind::bbox));
  m.init(2);
  const Model before = m;
  pretrain_fc(pretrain_cfg(3), corpus.dir.path(), corpus.manifest, m, InteractionKind::bbox);
  const auto enc = m.encoder_parameter_names();
  std::size_t changed = 0;
  for (const auto& param : m.params().all()) {
    const std::string& name = param.name;
    const bool is_enc = std::find(enc.begin(), enc.end(), name) != enc.end();
    const bool same = m.params().get(name).value == before.params().get(name).value;
    if (!is_enc) {
      EXPECT_TRUE(same) << name;
    }
    changed += !same;
  }
  EXPECT_GT(changed, 0u);
}

TEST(Pretrain, RejectsManifestWithoutSharedForegrounds) {
  DeskCorpus corpus(3, 1, 32);
  Model m(ModelConfig::toy(InteractionKind::bbox));
  m.init(0);
  EXPECT_THROW(pretrain_fc(pretrain_cfg(2), corpus.dir.path(), corpus.manifest, m, InteractionKind::bbox),
               InvalidInput);
}

TEST(Pretrain, ConsistencyMovingAverageNonIncreasing) {
  DeskCorpus corpus(8, 4, 64);
  Model m(ModelConfig::toy(InteractionKind::bbox));
  m.init(2);
  TrainConfig cfg = pretrain_cfg(60);
  cfg.batch_groups = TrainConfig{}.batch_groups;
  cfg.augment_cfg.crop = 64;
  const TrainResult r = pretrain_fc(cfg, corpus.dir.path(), corpus.manifest, m, InteractionKind::bbox);
  ASSERT_EQ(r.trace.size(), 60u);
  std::vector<double> window_means;
  for (std::size_t s = 0; s + 10 <= r.trace.size(); s += 10) {
    double sum = 0;
    for (std::size_t i = s; i < s + 10; ++i) sum += r.trace[i].loss.cons;
    window_means.push_back(sum / 10);
  }
  for (std::size_t i = 1; i < window_means.size(); ++i)
    EXPECT_LE(window_means[i], window_means[i - 1]) << "window " << i;
  for (const auto& row : r.trace) {
    EXPECT_GE(row.loss.cons, 0.0);
    EXPECT_LE(row.loss.cons, kLn2);
  }
}

TEST(TrainMain, CheckpointEchoesHyperparameters) {
  DeskCorpus corpus(2, 2, 40);
  Model m(ModelConfig::toy(InteractionKind::bbox));
  m.init(4);
  TrainConfig cfg;
  cfg.max_iters = 2;
  cfg.warmup_iters = 1;
  cfg.batch_size = 2;
  cfg.base_lr = 3e-4;
  cfg.lambda = 1.5;
  cfg.beta1 = 0.6;
  cfg.beta2 = 0.995;
  cfg.augment_cfg.crop = 32;
  TrainHooks hooks;
  hooks.checkpoint_path = corpus.dir.path() / "main.ckpt";
  const TrainResult r = train_main(cfg, corpus.dir.path(), corpus.manifest, m, InteractionKind::bbox, hooks);
  EXPECT_EQ(r.steps, 2);
  const LoadedCheckpoint ck = read_checkpoint(hooks.checkpoint_path);
  const auto j = nlohmann::json::parse(ck.meta.train_json);
  EXPECT_EQ(j["lambda"].get<double>(), 1.5);
  EXPECT_EQ(j["beta1"].get<double>(), 0.6);
  EXPECT_EQ(j["beta2"].get<double>(), 0.995);
  EXPECT_EQ(j["base_lr"].get<double>(), 3e-4);
  EXPECT_EQ(ck.meta.stage, "main");
  EXPECT_EQ(ck.meta.step, 2u);
  for (const auto& row : r.trace) {
    EXPECT_NEAR(row.loss.final_loss, row.loss.ce + 1.5 * row.loss.l1, 1e-12);
    EXPECT_GE(row.loss.ce, 0.0);
    EXPECT_GE(row.loss.l1, 0.0);
  }
}

TEST(TrainMain, TraceCsvLayout) {
  testing::TempDir dir("trace");
  std::vector<TraceRow> rows = {{0, 0.0, {0.5, 0.25, 0.75, 0.0}}, {1, 1e-4, {0.4, 0.2, 0.6, 0.0}}};
  write_trace_csv(dir.path() / "t.csv", rows);
  std::ifstream in(dir.path() / "t.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,lr,loss_ce,loss_l1,loss_final,loss_cons");
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  EXPECT_EQ(n, 2);
}

TEST(Training, ValidateRejectsBadConfig) {
  TrainConfig cfg;
  cfg.base_lr = 0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = TrainConfig{};
  cfg.lambda = -1;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  EXPECT_NO_THROW(TrainConfig{}.validate());
}

TEST(Config, ParseAndTypedAccess) {
  const auto kv = KeyValueConfig::parse("# comment\nbase_lr = 1e-3\n\nseed=42\naugment = false\n");
  EXPECT_DOUBLE_EQ(kv.get_double("base_lr", 0), 1e-3);
  EXPECT_EQ(kv.get_int("seed", 0), 42);
  EXPECT_FALSE(kv.get_bool("augment", true));
  EXPECT_EQ(kv.get_int("epochs", 7), 7);
  EXPECT_EQ(kv.canonical(), "augment=false\nbase_lr=1e-3\nseed=42\n");
}

TEST(Config, Rejections) {
  EXPECT_THROW(KeyValueConfig::parse("bogus = 1\n"), InvalidInput);
  EXPECT_THROW(KeyValueConfig::parse("no equals sign\n"), InvalidInput);
  const auto kv = KeyValueConfig::parse("base_lr = fast\nseed = 1.5\naugment = maybe\n");
  EXPECT_THROW(kv.get_double("base_lr", 0), InvalidInput);
  EXPECT_THROW(kv.get_int("seed", 0), InvalidInput);
  EXPECT_THROW(kv.get_bool("augment", true), InvalidInput);
  KeyValueConfig c;
  EXPECT_THROW(c.set("nope", "1"), InvalidInput);
}

TEST(Config, PrecedenceFileEnvFlag) {
  auto kv = KeyValueConfig::parse("base_lr = 1e-3\nseed = 1\n");
  kv.apply_environment({{"UNIMATTE_BASE_LR", "2e-3"}, {"UNIMATTE_NOT_A_KEY", "x"}, {"HOME", "/"}});
  EXPECT_DOUBLE_EQ(kv.get_double("base_lr", 0), 2e-3);
  EXPECT_EQ(kv.get_int("seed", 0), 1);
  kv.set("base_lr", "3e-3");
  EXPECT_DOUBLE_EQ(kv.get_double("base_lr", 0), 3e-3);
}

TEST(Config, TrainAndModelConfigFrom) {
  const auto kv = KeyValueConfig::parse(
      "lambda = 2\nbeta1 = 0.7\nmax_iters = 12\ncrop = 48\nmodel_profile = toy\nstage_widths = 4,8\n");
  const TrainConfig t = train_config_from(kv, TrainStage::main);
  EXPECT_EQ(t.lambda, 2.0);
  EXPECT_EQ(t.beta1, 0.7);
  EXPECT_EQ(t.max_iters, 12);
  EXPECT_EQ(t.augment_cfg.crop, 48);
  const ModelConfig m = model_config_from(kv, InteractionKind::trimap);
  EXPECT_EQ(m.stage_widths, (std::vector<int>{4, 8}));
  EXPECT_EQ(m.guidance_kind, InteractionKind::trimap);
  EXPECT_THROW(model_config_from(KeyValueConfig::parse("model_profile = huge\n"), InteractionKind::bbox),
               InvalidInput);
}

TEST(Config, HashHelpers) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
  RunStamp s;
  s.command = "eval";
  s.seed = 3;
  s.kernels = "scalar";
  s.extra["flag.out"] = "x.csv";
  const auto j = nlohmann::json::parse(stamp_to_json(s));
  EXPECT_EQ(j["command"], "eval");
  EXPECT_EQ(j["seed"], 3);
  EXPECT_EQ(j["kernels"], "scalar");
}

}  // namespace
}  // namespace unimatte
