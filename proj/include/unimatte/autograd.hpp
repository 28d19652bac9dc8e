// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Minimal reverse-mode differentiation over NCHW double tensors. A Graph is a
// tape: every op appends a node holding its value and a backward closure;
// backward() walks the tape once in reverse.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace unimatte::nn {

struct Shape {
  int n = 1, c = 1, h = 1, w = 1;
  std::size_t size() const { return static_cast<std::size_t>(n) * c * h * w; }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(s), data(s.size(), fill) {}

  double& at(int n, int c, int h, int w) { return data[index(n, c, h, w)]; }
  double at(int n, int c, int h, int w) const { return data[index(n, c, h, w)]; }
  double* plane(int n, int c) { return data.data() + index(n, c, 0, 0); }
  const double* plane(int n, int c) const { return data.data() + index(n, c, 0, 0); }
  std::size_t index(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape.c + c) * shape.h + h) * shape.w + w;
  }
};

/// Trainable tensor. Convolution weights use Shape{out, in, k, k}; biases Shape{1, out, 1, 1}.
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
};

/// Ordered, name-addressable parameter collection.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Shape shape);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  /// Number of scalar values across all parameters.
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

using NodeId = int;

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Constant input (no gradient).
  NodeId input(Tensor t);
  /// Leaf bound to a parameter; backward accumulates into p.grad (sized on demand).
  NodeId param(Parameter& p);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Shape& shape(NodeId id) const { return nodes_[id].value.shape; }
  /// Gradient after backward(); empty when the node does not depend on a parameter.
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Same-padding cross-correlation: pad = k / 2.
  NodeId conv2d(NodeId x, Parameter& weight, Parameter& bias, int stride);
  NodeId silu(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId clamp01(NodeId x);
  /// Forward is clamp01. Backward also passes gradients at saturated entries whose descent
  /// step points back into [0, 1], so an output pinned at a bound can still recover.
  NodeId clamp01_recoverable(NodeId x);
  NodeId add(NodeId a, NodeId b);
  /// Channel-wise concatenation.
  NodeId concat(std::span<const NodeId> xs);
  /// Average pooling with kernel = stride = k; edge windows average only in-image pixels.
  NodeId avgpool(NodeId x, int k);
  /// Corner-aligned bilinear resize.
  NodeId resize(NodeId x, int out_h, int out_w);
  /// Softmax across channels at every pixel.
  NodeId softmax_channels(NodeId x);
  /// y = sum_i weights[:, i] * branches[i]; weights has one channel per branch.
  NodeId weighted_sum(std::span<const NodeId> branches, NodeId weights);

  /// Mean over pixels of binary cross-entropy with probabilities clamped to [eps, 1 - eps].
  NodeId bce(NodeId prob, const Tensor& target, double eps = 1e-7);
  /// Mean absolute difference.
  NodeId l1(NodeId pred, const Tensor& target);
  /// a * x + b * y on scalars.
  NodeId combine(NodeId x, double a, NodeId y, double b);
  /// Mean over groups of the pairwise Jensen-Shannon consistency loss. Each group
  /// lists samples (batch indices of `features`) that share a foreground.
  NodeId consistency(NodeId features, const std::vector<std::vector<int>>& groups);

  /// Seeds d(root)/d(root) = 1 and accumulates parameter gradients.
  void backward(NodeId root);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    std::function<void()> back;
  };

  NodeId push(Tensor value, bool needs_grad);
  Tensor& g(NodeId id);  // gradient buffer, allocated on first use
  bool needs(NodeId id) const { return nodes_[id].needs_grad; }

  std::vector<Node> nodes_;
};

// Stand-alone forms of the consistency pieces (used by the loss module and tests).

/// Softmax of `n` logits into out.
void softmax(const double* logits, std::size_t n, double* out);
/// Jensen-Shannon divergence with natural log; ln 2 for disjoint supports.
double js_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace unimatte::nn
