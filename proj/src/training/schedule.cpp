// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unimatte/error.hpp"

namespace unimatte {

double lr_poly(std::int64_t iter, std::int64_t max_iter, double base_lr, double power) {
  if (max_iter <= 0) throw InvalidInput("lr_poly: max_iter must be positive");
  iter = std::clamp<std::int64_t>(iter, 0, max_iter);
  return base_lr * std::pow(1.0 - static_cast<double>(iter) / static_cast<double>(max_iter), power);
}

double lr_warmup_cosine(std::int64_t iter, std::int64_t warmup, std::int64_t max_iter,
                        double base_lr) {
  if (warmup < 0 || max_iter <= 0 || warmup > max_iter)
    throw InvalidInput("lr_warmup_cosine: need 0 <= warmup <= max_iter, max_iter > 0");
  iter = std::clamp<std::int64_t>(iter, 0, max_iter);
  if (iter < warmup) return base_lr * static_cast<double>(iter) / static_cast<double>(warmup);
  if (max_iter == warmup) return base_lr;
  const double t = static_cast<double>(iter - warmup) / static_cast<double>(max_iter - warmup);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void Adam::step(nn::ParamStore& params, double lr, const std::string& prefix) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto& p : params.all()) {
    if (!p.name.starts_with(prefix) || p.grad.size() != p.value.size()) continue;
    Moments& st = state_[p.name];
    if (st.m.size() != p.value.size()) {
      st.m.assign(p.value.size(), 0.0);
      st.v.assign(p.value.size(), 0.0);
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double gr = p.grad[i];
      st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * gr;
      st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * gr * gr;
      p.value[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + cfg_.eps);
    }
  }
}

}  // namespace unimatte
