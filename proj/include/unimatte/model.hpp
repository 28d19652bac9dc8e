// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Shared encoder, segmentation decoder, matting decoder with multi-scale
// attentive fusion (MAFM) and the transparency-mapping head.
//
// Encoder stage s (1-based) runs at input/2^s with stage_widths[s-1] channels.
// Both decoders mirror it U-Net style and finish at input resolution on
// stage_widths[0] channels.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "unimatte/autograd.hpp"
#include "unimatte/field.hpp"
#include "unimatte/interactions.hpp"

namespace unimatte {

struct ModelConfig {
  int input_channels = 4;
  std::vector<int> stage_widths{16, 32, 64, 128};
  InteractionKind guidance_kind = InteractionKind::bbox;
  /// MAFM is inserted only where both spatial axes are at least this large.
  int min_mafm_size = 5;

  static ModelConfig desk(InteractionKind kind);
  static ModelConfig toy(InteractionKind kind);
  /// ResNet-34-like channel profile.
  static ModelConfig full(InteractionKind kind);

  /// Throws InvalidInput on an inconsistent configuration.
  void validate() const;
  int stages() const { return static_cast<int>(stage_widths.size()); }
  /// Inputs must be divisible by this.
  int divisor() const { return 1 << stages(); }

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelOutput {
  Plane mask_prob;
  Alpha alpha;
};

/// Node ids of one MAFM application; useful for inspecting weights.
struct MafmNodes {
  nn::NodeId output = -1;
  std::array<nn::NodeId, 4> branches{};  // upsampled x0..x3
  nn::NodeId weights = -1;               // N x 4 x H x W softmax weights
};

struct Pyramid {
  nn::NodeId input = -1;
  std::vector<nn::NodeId> stages;  // e_1 .. e_S
};

struct ForwardNodes {
  Pyramid pyramid;
  nn::NodeId mask_logits = -1;
  nn::NodeId mask_prob = -1;
  nn::NodeId low_level = -1;  // l, matting decoder features at input resolution
  nn::NodeId alpha = -1;
};

class Model {
 public:
  explicit Model(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  /// Fan-in-scaled uniform weights (bound sqrt(6 / fan_in)), zero biases. The
  /// transparency-mapping output layer starts at bias 0.5 with weights scaled by 0.1
  /// so initial alphas sit inside the clamp range.
  void init(std::uint64_t seed);

  Pyramid encoder_forward(nn::Graph& g, nn::NodeId input);
  /// Returns {logits, prob}.
  std::pair<nn::NodeId, nn::NodeId> seg_decoder_forward(nn::Graph& g, const Pyramid& p);
  /// Returns {alpha, low-level features}.
  std::pair<nn::NodeId, nn::NodeId> mat_decoder_forward(nn::Graph& g, const Pyramid& p,
                                                        nn::NodeId mask_prob);
  ForwardNodes forward(nn::Graph& g, nn::NodeId input);

  /// Fusion block at `site`; throws ShapeError for spatial size below 5.
  MafmNodes mafm(nn::Graph& g, nn::NodeId x0, const std::string& site);

  /// Single-image inference.
  ModelOutput predict(const Image& image, const GuidanceMap& guidance);

  /// Names of encoder parameters (those updated by consistency pretraining).
  std::vector<std::string> encoder_parameter_names() const;

 private:
  void add_conv(const std::string& name, int in, int out, int k);
  nn::NodeId conv(nn::Graph& g, nn::NodeId x, const std::string& name, int stride);
  nn::NodeId decoder_tail(nn::Graph& g, const Pyramid& p, const std::string& prefix, bool fusion);

  ModelConfig cfg_;
  nn::ParamStore params_;
  std::vector<std::string> mafm_sites_;
};

/// Stacks images and guidance maps into an N x (3 + channels) x H x W tensor.
nn::Tensor make_input(const std::vector<const Image*>& images,
                      const std::vector<const GuidanceMap*>& guidance);

/// Single-sample field <-> 1 x 1 x H x W tensor.
nn::Tensor plane_tensor(std::span<const double> values, int h, int w);

}  // namespace unimatte
