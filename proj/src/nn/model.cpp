// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/model.hpp"

#include <cmath>

#include "json.hpp"
#include "unimatte/error.hpp"
#include "unimatte/rng.hpp"

namespace unimatte {

using nn::Graph;
using nn::NodeId;
using nn::Shape;
using nn::Tensor;

ModelConfig ModelConfig::desk(InteractionKind kind) {
  return {3 + channels_for(kind), {16, 32, 64, 128}, kind, 5};
}

ModelConfig ModelConfig::toy(InteractionKind kind) {
  return {3 + channels_for(kind), {8, 16, 32, 64}, kind, 5};
}

ModelConfig ModelConfig::full(InteractionKind kind) {
  return {3 + channels_for(kind), {64, 128, 256, 512}, kind, 5};
}

void ModelConfig::validate() const {
  if (stage_widths.empty()) throw InvalidInput("model: stage_widths must be nonempty");
  for (std::size_t i = 0; i < stage_widths.size(); ++i) {
    if (stage_widths[i] < 1) throw InvalidInput("model: stage widths must be positive");
    if (i > 0 && stage_widths[i] <= stage_widths[i - 1])
      throw InvalidInput("model: stage_widths must be strictly increasing");
  }
  if (input_channels < 4) throw InvalidInput("model: input_channels must be >= 4");
  if (input_channels != 3 + channels_for(guidance_kind))
    throw InvalidInput("model: input_channels must equal 3 + guidance channels for " +
                       std::string(to_string(guidance_kind)));
  if (min_mafm_size < 5) throw InvalidInput("model: min_mafm_size must be >= 5");
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["input_channels"] = input_channels;
  j["stage_widths"] = stage_widths;
  j["guidance_kind"] = std::string(to_string(guidance_kind));
  j["min_mafm_size"] = min_mafm_size;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.input_channels = j.at("input_channels").get<int>();
    c.stage_widths = j.at("stage_widths").get<std::vector<int>>();
    const auto kind = parse_interaction_kind(j.at("guidance_kind").get<std::string>());
    if (!kind) throw FormatError("model config: unknown guidance kind");
    c.guidance_kind = *kind;
    c.min_mafm_size = j.value("min_mafm_size", 5);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const auto& w = cfg_.stage_widths;
  const int S = cfg_.stages();

  add_conv("encoder.stem.conv", cfg_.input_channels, w[0], 3);
  add_conv("encoder.stem.res1", w[0], w[0], 3);
  add_conv("encoder.stem.res2", w[0], w[0], 3);
  for (int s = 2; s <= S; ++s) {
    const std::string p = "encoder.stage" + std::to_string(s);
    add_conv(p + ".conv1", w[s - 2], w[s - 1], 3);
    add_conv(p + ".conv2", w[s - 1], w[s - 1], 3);
    add_conv(p + ".skip", w[s - 2], w[s - 1], 1);
  }
  for (const std::string dec : {"seg", "mat"}) {
    for (int s = S - 1; s >= 1; --s)
      add_conv(dec + ".up" + std::to_string(s) + ".conv", w[s] + w[s - 1], w[s - 1], 3);
    add_conv(dec + ".up0.conv", w[0] + cfg_.input_channels, w[0], 3);
  }
  add_conv("seg.head", w[0], 1, 3);

  const auto add_site = [&](const std::string& site, int channels) {
    mafm_sites_.push_back(site);
    for (int i = 0; i < 4; ++i) add_conv(site + ".score" + std::to_string(i), channels, 1, 1);
  };
  add_site("mat.mafm.e" + std::to_string(S), w[S - 1]);
  for (int s = S - 1; s >= 1; --s) add_site("mat.mafm.up" + std::to_string(s), w[s - 1]);
  add_site("mat.mafm.up0", w[0]);
  add_conv("mat.tm.conv1", w[0] + 1, w[0], 3);
  add_conv("mat.tm.conv2", w[0], 1, 3);
}

void Model::add_conv(const std::string& name, int in, int out, int k) {
  params_.add(name + ".w", Shape{out, in, k, k});
  params_.add(name + ".b", Shape{1, out, 1, 1});
}

void Model::init(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : params_.all()) {
    if (p.name.ends_with(".b")) {
      std::fill(p.value.begin(), p.value.end(), 0.0);
      continue;
    }
    const double fan_in = static_cast<double>(p.shape.c) * p.shape.h * p.shape.w;
    double bound = std::sqrt(6.0 / fan_in);
    if (p.name == "mat.tm.conv2.w") bound *= 0.1;
    for (double& v : p.value) v = rng.uniform(-bound, bound);
  }
  std::fill(params_.get("mat.tm.conv2.b").value.begin(), params_.get("mat.tm.conv2.b").value.end(),
            0.5);
  params_.zero_grad();
}

NodeId Model::conv(Graph& g, NodeId x, const std::string& name, int stride) {
  return g.conv2d(x, params_.get(name + ".w"), params_.get(name + ".b"), stride);
}

MafmNodes Model::mafm(Graph& g, NodeId x0, const std::string& site) {
  const Shape s = g.shape(x0);
  if (s.h < 5 || s.w < 5)
    throw ShapeError("mafm: spatial size " + std::to_string(s.h) + "x" + std::to_string(s.w) +
                     " is below 5");
  static constexpr int kPool[4] = {0, 1, 3, 5};  // 0: x0 itself
  MafmNodes out;
  std::array<NodeId, 4> scores{};
  for (int i = 0; i < 4; ++i) {
    const NodeId xi = kPool[i] == 0 ? x0 : g.avgpool(x0, kPool[i]);
    const NodeId score = g.silu(conv(g, xi, site + ".score" + std::to_string(i), 1));
    scores[i] = g.resize(score, s.h, s.w);
    out.branches[i] = g.resize(xi, s.h, s.w);
  }
  out.weights = g.softmax_channels(g.concat(scores));
  out.output = g.weighted_sum(out.branches, out.weights);
  return out;
}

Pyramid Model::encoder_forward(Graph& g, NodeId input) {
  const Shape s = g.shape(input);
  if (s.c != cfg_.input_channels)
    throw ShapeError("encoder: input has " + std::to_string(s.c) + " channels, model expects " +
                     std::to_string(cfg_.input_channels));
  Pyramid p;
  p.input = input;
  NodeId x = g.silu(conv(g, input, "encoder.stem.conv", 2));
  NodeId r = conv(g, g.silu(conv(g, x, "encoder.stem.res1", 1)), "encoder.stem.res2", 1);
  x = g.silu(g.add(x, r));
  p.stages.push_back(x);
  for (int st = 2; st <= cfg_.stages(); ++st) {
    const std::string pre = "encoder.stage" + std::to_string(st);
    const NodeId h = conv(g, g.silu(conv(g, x, pre + ".conv1", 2)), pre + ".conv2", 1);
    x = g.silu(g.add(h, conv(g, x, pre + ".skip", 2)));
    p.stages.push_back(x);
  }
  return p;
}

NodeId Model::decoder_tail(Graph& g, const Pyramid& p, const std::string& prefix, bool fusion) {
  if (static_cast<int>(p.stages.size()) != cfg_.stages())
    throw ShapeError(prefix + " decoder: pyramid has " + std::to_string(p.stages.size()) +
                     " stages, model has " + std::to_string(cfg_.stages()));
  const auto fuse = [&](NodeId x, const std::string& site) {
    const Shape s = g.shape(x);
    if (!fusion || s.h < cfg_.min_mafm_size || s.w < cfg_.min_mafm_size) return x;
    return mafm(g, x, site).output;
  };
  const int S = cfg_.stages();
  NodeId d = fuse(p.stages[S - 1], "mat.mafm.e" + std::to_string(S));
  for (int s = S - 1; s >= 1; --s) {
    const NodeId skip = p.stages[s - 1];
    if (g.shape(skip).c != cfg_.stage_widths[s - 1])
      throw ShapeError(prefix + " decoder: pyramid stage width mismatch");
    d = g.resize(d, g.shape(skip).h, g.shape(skip).w);
    const NodeId cat[2] = {d, skip};
    d = g.silu(conv(g, g.concat(cat), prefix + ".up" + std::to_string(s) + ".conv", 1));
    d = fuse(d, "mat.mafm.up" + std::to_string(s));
  }
  const Shape in = g.shape(p.input);
  d = g.resize(d, in.h, in.w);
  const NodeId cat[2] = {d, p.input};
  d = g.silu(conv(g, g.concat(cat), prefix + ".up0.conv", 1));
  return fuse(d, "mat.mafm.up0");
}

std::pair<NodeId, NodeId> Model::seg_decoder_forward(Graph& g, const Pyramid& p) {
  const NodeId d = decoder_tail(g, p, "seg", false);
  const NodeId logits = conv(g, d, "seg.head", 1);
  return {logits, g.sigmoid(logits)};
}

std::pair<NodeId, NodeId> Model::mat_decoder_forward(Graph& g, const Pyramid& p,
                                                     NodeId mask_prob) {
  const NodeId l = decoder_tail(g, p, "mat", true);
  const Shape ls = g.shape(l);
  const NodeId m = g.resize(mask_prob, ls.h, ls.w);
  const Shape ms = g.shape(m);
  if (ms.n != ls.n || ms.c != 1 || ms.h != ls.h || ms.w != ls.w)
    throw ShapeError("mat decoder: mask does not match low-level features");
  const NodeId cat[2] = {l, m};
  const NodeId h = g.silu(conv(g, g.concat(cat), "mat.tm.conv1", 1));
  return {g.clamp01_recoverable(conv(g, h, "mat.tm.conv2", 1)), l};
}

ForwardNodes Model::forward(Graph& g, NodeId input) {
  ForwardNodes f;
  f.pyramid = encoder_forward(g, input);
  std::tie(f.mask_logits, f.mask_prob) = seg_decoder_forward(g, f.pyramid);
  std::tie(f.alpha, f.low_level) = mat_decoder_forward(g, f.pyramid, f.mask_prob);
  return f;
}

ModelOutput Model::predict(const Image& image, const GuidanceMap& guidance) {
  if (guidance.kind != cfg_.guidance_kind)
    throw InvalidInput("predict: guidance is " + std::string(to_string(guidance.kind)) + ", model expects " +
                       std::string(to_string(cfg_.guidance_kind)));
  Graph g;
  const NodeId in = g.input(make_input({&image}, {&guidance}));
  const ForwardNodes f = forward(g, in);
  const int h = image.height(), w = image.width();
  const auto& mp = g.value(f.mask_prob).data;
  const auto& al = g.value(f.alpha).data;
  return {Plane(h, w, std::vector<double>(mp.begin(), mp.end())),
          Alpha(h, w, std::vector<double>(al.begin(), al.end()))};
}

std::vector<std::string> Model::encoder_parameter_names() const {
  std::vector<std::string> out;
  for (const auto& p : params_.all())
    if (p.name.starts_with("encoder.")) out.push_back(p.name);
  return out;
}

Tensor make_input(const std::vector<const Image*>& images,
                  const std::vector<const GuidanceMap*>& guidance) {
  if (images.empty() || images.size() != guidance.size())
    throw ShapeError("make_input: need one guidance map per image");
  const int h = images[0]->height(), w = images[0]->width(), gc = guidance[0]->channels;
  Tensor t(Shape{static_cast<int>(images.size()), 3 + gc, h, w});
  const std::size_t hw = t.shape.plane();
  for (std::size_t n = 0; n < images.size(); ++n) {
    const Image& im = *images[n];
    const GuidanceMap& gm = *guidance[n];
    if (im.height() != h || im.width() != w || gm.height != h || gm.width != w || gm.channels != gc)
      throw ShapeError("make_input: batch members must share size and guidance channels");
    for (int c = 0; c < 3; ++c)
      std::copy(im.channel(c).begin(), im.channel(c).end(), t.plane(static_cast<int>(n), c));
    std::copy(gm.values.begin(), gm.values.begin() + gc * hw, t.plane(static_cast<int>(n), 3));
  }
  return t;
}

Tensor plane_tensor(std::span<const double> values, int h, int w) {
  Tensor t(Shape{1, 1, h, w});
  if (values.size() != t.data.size()) throw ShapeError("plane_tensor: size mismatch");
  std::copy(values.begin(), values.end(), t.data.begin());
  return t;
}

}  // namespace unimatte
