// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "testing/fixtures.hpp"
#include "unimatte/checkpoint.hpp"
#include "unimatte/datasets.hpp"
#include "unimatte/png_io.hpp"

namespace unimatte {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status = -1;
  std::string output;
};

CliRun run_cli(const std::string& args, const std::string& env = "") {
  testing::TempDir tmp("cli_out");
  const fs::path log = tmp.path() / "log.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(UNIMATTE_CLI) + " " + args +
                          " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Sources for 8 foregrounds and 6 backgrounds, shared by the tests below.
class CliCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli_corpus");
    const CliRun g = run_cli("gen-sources --out " + src().string() +
                          " --opaque 5 --transparent 3 --backgrounds 6 --size 48 --seed 3");
    ASSERT_EQ(g.status, 0) << g.output;
    const CliRun s = run_cli("synth --fg-dir " + src().string() + " --bg-dir " + src().string() +
                          " --out " + corpus().string() + " --per-fg 4 --unified-scale 0.2 --seed 4");
    ASSERT_EQ(s.status, 0) << s.output;
    Model m(ModelConfig::toy(InteractionKind::bbox));
    m.init(9);
    save_checkpoint(ckpt(), m, {0, "init", "{}"});
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path src() { return dir_->path() / "src"; }
  static fs::path corpus() { return dir_->path() / "corpus"; }
  static fs::path ckpt() { return dir_->path() / "bbox.ckpt"; }
  static fs::path work() { return dir_->path(); }

  static testing::TempDir* dir_;
};

testing::TempDir* CliCorpus::dir_ = nullptr;

TEST(Cli, MissingRequiredFlagExitsTwo) {
  const CliRun r = run_cli("synth --fg-dir a --bg-dir b");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("--out"), std::string::npos);
}

TEST(Cli, HelpExitsZero) {
  const CliRun r = run_cli("--help");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.output.find("synth"), std::string::npos);
}

TEST(Cli, UnknownKeyIsRejected) {
  const CliRun r = run_cli("gen-sources --out /tmp/x --set nonsense=1");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("nonsense"), std::string::npos);
}

TEST_F(CliCorpus, SynthWritesTrainAndTestManifests) {
  const Manifest train = read_manifest(corpus() / "train" / "manifest.jsonl");
  EXPECT_EQ(train.records.size(), 32u);
  const Manifest test = read_manifest(corpus() / "test" / "manifest.jsonl");
  EXPECT_EQ(test.count(Category::SO), 62u);
  EXPECT_EQ(test.count(Category::ST), 28u);
  EXPECT_EQ(test.count(Category::NSO), 56u);
  EXPECT_EQ(test.count(Category::NST), 15u);
  const auto stamp = nlohmann::json::parse(slurp(corpus() / "stamp.json"));
  EXPECT_EQ(stamp["command"], "synth");
  EXPECT_EQ(stamp["seed"], 4);
  EXPECT_FALSE(stamp["corpus_hash"].get<std::string>().empty());
}

TEST_F(CliCorpus, InvalidInteractionListsValidKinds) {
  const CliRun r = run_cli("predict --checkpoint " + ckpt().string() + " --image " +
                        (src() / "bg" / "bg_000.png").string() + " --out " +
                        (work() / "x.png").string() + " --interaction lasso");
  EXPECT_NE(r.status, 0);
  for (const char* kind : {"fg_point", "bbox", "fg_bg_points", "extreme_points", "scribble", "trimap"})
    EXPECT_NE(r.output.find(kind), std::string::npos) << kind;
}

TEST_F(CliCorpus, PredictWritesInputSizedAlpha) {
  const fs::path out = work() / "pred.png", image = work() / "in64.png";
  png::write_rgb(image, testing::random_image(64, 64, 12));
  const CliRun r = run_cli("predict --checkpoint " + ckpt().string() + " --image " + image.string() +
                        " --out " + out.string() +
                        " --mask-out " + (work() / "mask.png").string() +
                        " --interaction bbox --box 0,20,30,50");
  ASSERT_EQ(r.status, 0) << r.output;
  const Alpha a = png::read_alpha(out);
  EXPECT_EQ(a.height(), 64);
  EXPECT_EQ(a.width(), 64);
  EXPECT_TRUE(fs::exists(work() / "mask.png"));
  EXPECT_TRUE(fs::exists(out.string() + ".stamp.json"));
}

TEST_F(CliCorpus, PredictKindMismatchFails) {
  const CliRun r = run_cli("predict --checkpoint " + ckpt().string() + " --image " +
                        (src() / "bg" / "bg_000.png").string() + " --out " +
                        (work() / "y.png").string() + " --interaction fg_point --point 10,10");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("error:"), std::string::npos);
}

TEST_F(CliCorpus, EvalIsDeterministicAndStamped) {
  const fs::path a = work() / "a.csv", b = work() / "b.csv";
  const std::string base = "eval --corpus " + (corpus() / "test").string() + " --checkpoint " +
                           ckpt().string() + " --interaction bbox --seed 7 --out ";
  const CliRun ra = run_cli(base + a.string(), "UNIMATTE_KERNELS=scalar");
  ASSERT_EQ(ra.status, 0) << ra.output;
  const CliRun rb = run_cli(base + b.string(), "UNIMATTE_KERNELS=scalar");
  ASSERT_EQ(rb.status, 0) << rb.output;
  EXPECT_EQ(slurp(a), slurp(b));
  const auto stamp = nlohmann::json::parse(slurp(a.string() + ".stamp.json"));
  EXPECT_EQ(stamp["command"], "eval");
  EXPECT_EQ(stamp["kernels"], "scalar");
  EXPECT_EQ(stamp["seed"], 7);
}

}  // namespace
}  // namespace unimatte
