// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unimatte/autograd.hpp"

namespace unimatte {

/// base_lr * (1 - iter / max_iter)^power; iter is clamped to [0, max_iter].
double lr_poly(std::int64_t iter, std::int64_t max_iter, double base_lr, double power = 0.9);

/// Linear ramp 0 -> base_lr over `warmup` iterations, then half-cosine decay to 0 at max_iter.
double lr_warmup_cosine(std::int64_t iter, std::int64_t warmup, std::int64_t max_iter,
                        double base_lr);

struct AdamConfig {
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are keyed by parameter name.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// Updates every parameter whose name starts with `prefix` using its grad.
  void step(nn::ParamStore& params, double lr, const std::string& prefix = "");
  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace unimatte
