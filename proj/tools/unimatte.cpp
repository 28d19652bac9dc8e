// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

// unimatte: command-line entry points for every pipeline stage.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "unimatte/checkpoint.hpp"
#include "unimatte/config.hpp"
#include "unimatte/datasets.hpp"
#include "unimatte/error.hpp"
#include "unimatte/imaging.hpp"
#include "unimatte/interaction_json.hpp"
#include "unimatte/kernels.hpp"
#include "unimatte/metrics.hpp"
#include "unimatte/png_io.hpp"
#include "unimatte/rng.hpp"
#include "unimatte/service.hpp"
#include "unimatte/taxonomy.hpp"
#include "unimatte/training.hpp"

namespace fs = std::filesystem;
using namespace unimatte;

namespace {

// Flags shared by every stage that reads a key = value config.
struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string stamp;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--config", a.config, "key = value config file")->check(CLI::ExistingFile);
  app->add_option("--set", a.sets, "override a config key (key=value); repeatable");
  app->add_option("--seed", a.seed, "random seed");
  app->add_option("--stamp", a.stamp, "reproducibility stamp path (default: next to the output)");
}

KeyValueConfig load_config(const CommonArgs& a) {
  KeyValueConfig kv = a.config.empty() ? KeyValueConfig{} : KeyValueConfig::from_file(a.config);
  kv.apply_process_environment();
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + s + "'");
    kv.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (a.seed) kv.set("seed", std::to_string(*a.seed));
  return kv;
}

CLI::Validator interaction_validator(bool allow_all) {
  return CLI::Validator(
      [allow_all](std::string& s) -> std::string {
        if (allow_all && s == "all") return {};
        if (parse_interaction_kind(s)) return {};
        return "invalid interaction '" + s + "'; valid kinds: " + interaction_kind_list() +
               (allow_all ? " (or all)" : "");
      },
      "KIND");
}

InteractionKind kind_of(const std::string& s) { return *parse_interaction_kind(s); }

// Stamp with the effective config and the flags that shaped the run.
void stamp_run(const std::string& command, const KeyValueConfig& kv,
               const std::map<std::string, std::string>& flags, const fs::path& where,
               const std::string& corpus) {
  std::string canon = "command=" + command + "\n" + kv.canonical();
  for (const auto& [k, v] : flags) canon += "--" + k + "=" + v + "\n";
  RunStamp s;
  s.command = command;
  s.config_hash = hex64(fnv1a64(canon));
  s.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  s.corpus_hash = corpus;
  s.kernels = std::string(kernels::isa_name(kernels::active().isa));
  for (const auto& [k, v] : kv.values()) s.extra["config." + k] = v;
  for (const auto& [k, v] : flags) s.extra["flag." + k] = v;
  write_stamp(where, s);
}

fs::path stamp_path(const CommonArgs& a, const fs::path& out, bool out_is_dir) {
  if (!a.stamp.empty()) return a.stamp;
  if (out_is_dir) return out / "stamp.json";
  return fs::path(out.string() + ".stamp.json");
}

std::vector<int> parse_ints(const std::string& s, char sep, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(part, &pos));
      if (pos != part.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidInput(what + ": expected integers, got '" + s + "'");
    }
  }
  return out;
}

Pixel parse_pixel(const std::string& s, const std::string& what) {
  const auto v = parse_ints(s, ',', what);
  if (v.size() != 2) throw InvalidInput(what + ": expected row,col, got '" + s + "'");
  return {v[0], v[1]};
}

void print_manifest_summary(const std::string& label, const Manifest& m) {
  std::cout << label << ": " << m.records.size() << " records (";
  bool first = true;
  for (Category c : kAllCategories) {
    std::cout << (first ? "" : ", ") << to_string(c) << '=' << m.count(c);
    first = false;
  }
  std::cout << ")\n";
}

// ---------------------------------------------------------------------------

struct GenSourcesArgs {
  CommonArgs common;
  std::string out;
  int opaque = 8, transparent = 4, backgrounds = 16, size = 64;
};

int run_gen_sources(const GenSourcesArgs& a) {
  const KeyValueConfig kv = load_config(a.common);
  const auto seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  std::vector<ForegroundSource> fgs;
  std::vector<BackgroundSource> bgs;
  char id[32];
  for (int i = 0; i < a.opaque; ++i) {
    std::snprintf(id, sizeof id, "fg_o_%03d", i);
    fgs.push_back(generate_foreground(id, Opacity::opaque, a.size, derive_seed(seed, 1000 + i)));
  }
  for (int i = 0; i < a.transparent; ++i) {
    std::snprintf(id, sizeof id, "fg_t_%03d", i);
    fgs.push_back(
        generate_foreground(id, Opacity::transparent, a.size, derive_seed(seed, 2000 + i)));
  }
  for (int i = 0; i < a.backgrounds; ++i) {
    std::snprintf(id, sizeof id, "bg_%03d", i);
    bgs.push_back(generate_background(id, a.size, derive_seed(seed, 3000 + i)));
  }
  write_sources(a.out, fgs, bgs);
  std::cout << "wrote " << fgs.size() << " foregrounds and " << bgs.size() << " backgrounds to "
            << a.out << '\n';
  stamp_run("gen-sources", kv,
            {{"out", a.out},
             {"opaque", std::to_string(a.opaque)},
             {"transparent", std::to_string(a.transparent)},
             {"backgrounds", std::to_string(a.backgrounds)},
             {"size", std::to_string(a.size)}},
            stamp_path(a.common, a.out, true), "");
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  CommonArgs common;
  std::string fg_dir, bg_dir, out;
  int per_fg = 4;
  std::string unified_ratio = "310:140:280:75";
  double unified_scale = 0.2;
};

int run_synth(const SynthArgs& a) {
  const KeyValueConfig kv = load_config(a.common);
  const auto seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  const UnifiedCounts ratio = parse_ratio(a.unified_ratio);
  if (!fs::is_directory(a.fg_dir)) throw InvalidInput("--fg-dir: not a directory: " + a.fg_dir);
  if (!fs::is_directory(a.bg_dir)) throw InvalidInput("--bg-dir: not a directory: " + a.bg_dir);
  const auto fgs = read_foregrounds(a.fg_dir);
  const auto bgs = read_backgrounds(a.bg_dir);
  if (fgs.empty()) throw InvalidInput("--fg-dir: no foregrounds found in " + a.fg_dir);
  if (bgs.empty()) throw InvalidInput("--bg-dir: no backgrounds found in " + a.bg_dir);

  const fs::path out(a.out);
  const Manifest train = build_composites(fgs, bgs, a.per_fg, derive_seed(seed, 1), out / "train");
  print_manifest_summary("train", train);
  std::string corpus = corpus_hash(out / "train" / "manifest.jsonl");

  if (a.unified_scale > 0) {
    const UnifiedCounts counts = scale_ratio(ratio, a.unified_scale);
    std::vector<ForegroundSource> opaque, transparent;
    for (const auto& f : fgs)
      (transparency_fraction(f.alpha) < kTransparencyThreshold ? opaque : transparent).push_back(f);
    UnifiedSources src{opaque, transparent, opaque, transparent, bgs};
    const Manifest test = build_unified_testset(src, counts, derive_seed(seed, 2), out / "test");
    print_manifest_summary("test", test);
    corpus = hex64(fnv1a64(corpus + corpus_hash(out / "test" / "manifest.jsonl")));
  }
  stamp_run("synth", kv,
            {{"fg-dir", a.fg_dir},
             {"bg-dir", a.bg_dir},
             {"out", a.out},
             {"per-fg", std::to_string(a.per_fg)},
             {"unified-ratio", a.unified_ratio},
             {"unified-scale", std::to_string(a.unified_scale)}},
            stamp_path(a.common, out, true), corpus);
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  CommonArgs common;
  std::string corpus, out, interaction = "bbox", init;
};

int run_train(const TrainArgs& a, TrainStage stage) {
  const KeyValueConfig kv = load_config(a.common);
  const InteractionKind kind = kind_of(a.interaction);
  const TrainConfig cfg = train_config_from(kv, stage);
  const fs::path root(a.corpus);
  const Manifest manifest = read_manifest(root / "manifest.jsonl");

  Model model(model_config_from(kv, kind));
  model.init(cfg.seed);
  if (!a.init.empty()) {
    const std::size_t n = apply_checkpoint(model, read_checkpoint(a.init), false);
    std::cout << "initialized " << n << " tensors from " << a.init << '\n';
  }
  TrainHooks hooks;
  hooks.checkpoint_path = a.out;
  hooks.on_snapshot = [](std::int64_t step, Model&) {
    std::cerr << "snapshot at step " << step << '\n';
  };
  const TrainResult r = stage == TrainStage::pretrain
                            ? pretrain_fc(cfg, root, manifest, model, kind, hooks)
                            : train_main(cfg, root, manifest, model, kind, hooks);
  write_trace_csv(a.out + ".trace.csv", r.trace);
  if (!r.trace.empty()) {
    const LossParts& last = r.trace.back().loss;
    std::cout << (stage == TrainStage::pretrain ? "pretrain" : "train") << ": " << r.steps
              << " steps, final "
              << (stage == TrainStage::pretrain ? "loss_cons=" + std::to_string(last.cons)
                                                : "loss_final=" + std::to_string(last.final_loss))
              << '\n';
  }
  stamp_run(stage == TrainStage::pretrain ? "pretrain" : "train", kv,
            {{"corpus", a.corpus}, {"out", a.out}, {"interaction", a.interaction}, {"init", a.init}},
            stamp_path(a.common, a.out, false), corpus_hash(root / "manifest.jsonl"));
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  CommonArgs common;
  std::string corpus, checkpoint, out, interaction = "bbox", region = "trimap_free", format;
};

int run_eval(const EvalArgs& a) {
  const KeyValueConfig kv = load_config(a.common);
  const fs::path root(a.corpus);
  const Manifest manifest = read_manifest(root / "manifest.jsonl");
  RegionSpec region;
  region.mode = *parse_region_mode(a.region);
  region.unknown_band = static_cast<int>(kv.get_int("unknown_band", region.unknown_band));
  const auto seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  const SimulationOptions sim = simulation_options_from(kv);

  const bool sweep = a.interaction == "all";
  const std::string placeholder = "{kind}";
  const auto pos = a.checkpoint.find(placeholder);
  if (sweep && pos == std::string::npos)
    throw InvalidInput("--interaction all needs a --checkpoint containing {kind}");

  std::vector<MetricsReport> reports;
  const auto kinds = sweep ? std::vector<InteractionKind>(kAllInteractionKinds.begin(),
                                                          kAllInteractionKinds.end())
                           : std::vector<InteractionKind>{kind_of(a.interaction)};
  for (InteractionKind k : kinds) {
    std::string path = a.checkpoint;
    if (pos != std::string::npos) path.replace(pos, placeholder.size(), to_string(k));
    Model model = load_model(path);
    reports.push_back(evaluate(model, root, manifest, k, region, seed, sim));
    std::cerr << "evaluated " << to_string(k) << " on " << manifest.records.size()
              << " samples\n";
  }

  std::string format = a.format;
  if (format.empty()) format = fs::path(a.out).extension() == ".json" ? "json" : "csv";
  std::string text;
  if (sweep) {
    if (format == "json") {
      text = "[\n";
      for (std::size_t i = 0; i < reports.size(); ++i)
        text += report_to_json(reports[i]) + (i + 1 < reports.size() ? ",\n" : "\n");
      text += "]\n";
    } else {
      text = sweep_to_csv(reports);
    }
  } else {
    text = format == "json" ? report_to_json(reports[0]) + "\n" : report_to_csv(reports[0]);
  }
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  std::ofstream(a.out) << text;
  std::cout << text;
  stamp_run("eval", kv,
            {{"corpus", a.corpus},
             {"checkpoint", a.checkpoint},
             {"out", a.out},
             {"interaction", a.interaction},
             {"region", a.region},
             {"format", format}},
            stamp_path(a.common, a.out, false), corpus_hash(root / "manifest.jsonl"));
  return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  CommonArgs common;
  std::string checkpoint, image, out, mask_out, interaction = "bbox";
  std::string box, scribble, trimap, interaction_json;
  std::vector<std::string> points, bg_points;
};

Interaction interaction_from_flags(const PredictArgs& a, int h, int w) {
  if (!a.interaction_json.empty()) {
    std::ifstream in(a.interaction_json);
    if (!in) throw InvalidInput("--interaction-json: cannot open " + a.interaction_json);
    std::stringstream ss;
    ss << in.rdbuf();
    return interaction_from_json(ss.str());
  }
  Interaction it;
  it.kind = kind_of(a.interaction);
  switch (it.kind) {
    case InteractionKind::bbox: {
      if (a.box.empty()) throw InvalidInput("bbox needs --box r0,c0,r1,c1");
      const auto v = parse_ints(a.box, ',', "--box");
      if (v.size() != 4) throw InvalidInput("--box: expected r0,c0,r1,c1");
      it.box = Box{v[0], v[1], v[2], v[3]};
      break;
    }
    case InteractionKind::fg_point:
    case InteractionKind::extreme_points:
    case InteractionKind::fg_bg_points:
      for (const auto& p : a.points) {
        const Pixel px = parse_pixel(p, "--point");
        it.points.push_back({px.row, px.col, PointRole::foreground});
      }
      for (const auto& p : a.bg_points) {
        const Pixel px = parse_pixel(p, "--bg-point");
        it.points.push_back({px.row, px.col, PointRole::background});
      }
      break;
    case InteractionKind::scribble: {
      if (a.scribble.empty()) throw InvalidInput("scribble needs --scribble r,c;r,c;r,c");
      std::vector<Pixel> control;
      std::stringstream ss(a.scribble);
      std::string part;
      while (std::getline(ss, part, ';')) control.push_back(parse_pixel(part, "--scribble"));
      BinaryMask line(h, w);
      for (const Pixel& p : rasterize_spline(control, h, w)) line(p.row, p.col) = 1.0;
      const BinaryMask stroke = dilate(line, SimulationOptions{}.scribble_width / 2);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          if (stroke(r, c) > 0) it.stroke.push_back({r, c});
      break;
    }
    case InteractionKind::trimap:
      if (a.trimap.empty()) throw InvalidInput("trimap needs --trimap PATH");
      it.trimap = png::read_trimap(a.trimap);
      it.trimap_ref = a.trimap;
      break;
  }
  return it;
}

int run_predict(const PredictArgs& a) {
  const KeyValueConfig kv = load_config(a.common);
  Model model = load_model(a.checkpoint);
  const Image image = png::read_rgb(a.image);
  const Interaction it = interaction_from_flags(a, image.height(), image.width());
  validate(it, image.height(), image.width());
  if (it.kind != model.config().guidance_kind)
    throw InvalidInput("checkpoint was trained for " +
                       std::string(to_string(model.config().guidance_kind)) + ", not " +
                       std::string(to_string(it.kind)));
  const SimulationOptions sim = simulation_options_from(kv);
  const ModelOutput out =
      model.predict(image, encode_guidance(it, image.height(), image.width(), sim.point_sigma));
  png::write_alpha(a.out, out.alpha);
  if (!a.mask_out.empty()) png::write_alpha(a.mask_out, field_cast<Alpha>(out.mask_prob));
  std::cout << "wrote " << a.out << " (" << out.alpha.height() << "x" << out.alpha.width()
            << ")\n";
  stamp_run("predict", kv,
            {{"checkpoint", a.checkpoint},
             {"image", a.image},
             {"out", a.out},
             {"interaction", interaction_to_json(it)}},
            stamp_path(a.common, a.out, false), "");
  return 0;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  CommonArgs common;
  std::string checkpoint, host = "127.0.0.1";
  int port = 8080;
};

int run_serve(const ServeArgs& a) {
  const KeyValueConfig kv = load_config(a.common);
  Model model = load_model(a.checkpoint);
  ServiceOptions opt;
  opt.max_pixels = static_cast<std::size_t>(kv.get_int("max_pixels", opt.max_pixels));
  opt.idle_timeout = std::chrono::seconds(kv.get_int("idle_timeout_s", opt.idle_timeout.count()));
  opt.point_sigma = simulation_options_from(kv).point_sigma;
  opt.model_id = fs::path(a.checkpoint).stem().string() + ":" +
                 std::string(to_string(model.config().guidance_kind));
  MattingService service(std::move(model), opt);
  const int port = service.bind(a.host, a.port);
  stamp_run("serve", kv,
            {{"checkpoint", a.checkpoint}, {"host", a.host}, {"port", std::to_string(port)}},
            a.common.stamp.empty() ? fs::path(a.checkpoint + ".serve.stamp.json")
                                   : fs::path(a.common.stamp),
            "");
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  service.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unimatte: unified interactive image matting"};
  app.require_subcommand(1);

  GenSourcesArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-sources", "generate procedural foregrounds and backgrounds");
  add_common(gen_cmd, gen.common);
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--opaque", gen.opaque, "opaque foregrounds");
  gen_cmd->add_option("--transparent", gen.transparent, "transparent foregrounds");
  gen_cmd->add_option("--backgrounds", gen.backgrounds, "backgrounds");
  gen_cmd->add_option("--size", gen.size, "edge length in pixels")->check(CLI::Range(16, 4096));

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "build the training corpus and the unified test set");
  add_common(synth_cmd, synth.common);
  synth_cmd->add_option("--fg-dir", synth.fg_dir, "directory with fg/ and alpha/")->required();
  synth_cmd->add_option("--bg-dir", synth.bg_dir, "background directory")->required();
  synth_cmd->add_option("--out", synth.out, "corpus root")->required();
  synth_cmd->add_option("--per-fg", synth.per_fg, "composites per foreground");
  synth_cmd->add_option("--unified-ratio", synth.unified_ratio, "SO:ST:NSO:NST");
  synth_cmd->add_option("--unified-scale", synth.unified_scale,
                        "test-set size as a fraction of the ratio (0 skips it)");

  TrainArgs pre, train;
  auto* pre_cmd = app.add_subcommand("pretrain", "foreground-consistency encoder pretraining");
  auto* train_cmd = app.add_subcommand("train", "main training stage");
  for (auto [cmd, args] : {std::pair{pre_cmd, &pre}, std::pair{train_cmd, &train}}) {
    add_common(cmd, args->common);
    cmd->add_option("--corpus", args->corpus, "training corpus directory")->required();
    cmd->add_option("--out", args->out, "checkpoint path")->required();
    cmd->add_option("--interaction", args->interaction, "guidance kind")
        ->check(interaction_validator(false));
    cmd->add_option("--init", args->init, "initialize matching tensors from a checkpoint")
        ->check(CLI::ExistingFile);
  }

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate checkpoints on a test corpus");
  add_common(eval_cmd, ev.common);
  eval_cmd->add_option("--corpus", ev.corpus, "test corpus directory")->required();
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint; {kind} expands per interaction")
      ->required();
  eval_cmd->add_option("--out", ev.out, "report path")->required();
  eval_cmd->add_option("--interaction", ev.interaction, "guidance kind or all")
      ->check(interaction_validator(true));
  eval_cmd->add_option("--region", ev.region, "metric region")
      ->check(CLI::IsMember({"trimap_based", "trimap_free"}));
  eval_cmd->add_option("--format", ev.format, "csv or json (default from --out)")
      ->check(CLI::IsMember({"csv", "json"}));

  PredictArgs pr;
  auto* pred_cmd = app.add_subcommand("predict", "predict an alpha matte for one image");
  add_common(pred_cmd, pr.common);
  pred_cmd->add_option("--checkpoint", pr.checkpoint, "checkpoint")->required();
  pred_cmd->add_option("--image", pr.image, "input PNG")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--out", pr.out, "alpha PNG")->required();
  pred_cmd->add_option("--mask-out", pr.mask_out, "mask probability PNG");
  pred_cmd->add_option("--interaction", pr.interaction, "guidance kind")
      ->check(interaction_validator(false));
  pred_cmd->add_option("--box", pr.box, "r0,c0,r1,c1");
  pred_cmd->add_option("--point", pr.points, "foreground point r,c; repeatable");
  pred_cmd->add_option("--bg-point", pr.bg_points, "background point r,c; repeatable");
  pred_cmd->add_option("--scribble", pr.scribble, "spline control points r,c;r,c;...");
  pred_cmd->add_option("--trimap", pr.trimap, "trimap PNG")->check(CLI::ExistingFile);
  pred_cmd->add_option("--interaction-json", pr.interaction_json, "interaction JSON file")
      ->check(CLI::ExistingFile);

  ServeArgs sv;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP prediction service");
  add_common(serve_cmd, sv.common);
  serve_cmd->add_option("--checkpoint", sv.checkpoint, "checkpoint")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", sv.port, "port (0 picks a free one)");
  serve_cmd->add_option("--host", sv.host, "bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) return run_gen_sources(gen);
    if (*synth_cmd) return run_synth(synth);
    if (*pre_cmd) return run_train(pre, TrainStage::pretrain);
    if (*train_cmd) return run_train(train, TrainStage::main);
    if (*eval_cmd) return run_eval(ev);
    if (*pred_cmd) return run_predict(pr);
    if (*serve_cmd) return run_serve(sv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
