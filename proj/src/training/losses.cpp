// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/losses.hpp"

#include <algorithm>
#include <cmath>

#include "unimatte/error.hpp"
#include "unimatte/kernels.hpp"

namespace unimatte {

double loss_ce(std::span<const double> prob, std::span<const double> target, double eps) {
  if (prob.size() != target.size() || prob.empty()) throw ShapeError("loss_ce: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = std::clamp(prob[i], eps, 1.0 - eps);
    s -= target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
  }
  return s / static_cast<double>(prob.size());
}

double loss_ce(const Plane& mask_prob, const BinaryMask& m_gt) {
  require_same_shape(mask_prob, m_gt, "loss_ce");
  std::vector<double> t(m_gt.values().begin(), m_gt.values().end());
  return loss_ce(mask_prob.values(), t);
}

double loss_l1(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) throw ShapeError("loss_l1: shape mismatch");
  return kernels::active().abs_diff_sum(pred.size(), pred.data(), target.data()) /
         static_cast<double>(pred.size());
}

double loss_l1(const Alpha& pred, const Alpha& gt) {
  require_same_shape(pred, gt, "loss_l1");
  return loss_l1(pred.values(), gt.values());
}

double loss_final(const Plane& mask_prob, const BinaryMask& m_gt, const Alpha& alpha_pred,
                  const Alpha& alpha_gt, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidInput("loss_final: lambda must be >= 0");
  return loss_ce(mask_prob, m_gt) + lambda * loss_l1(alpha_pred, alpha_gt);
}

double loss_cons(const std::vector<nn::Tensor>& group) {
  if (group.size() < 2) throw InvalidInput("loss_cons: group needs at least two features");
  const nn::Shape s = group[0].shape;
  if (s.n != 1) throw ShapeError("loss_cons: features must be single samples");
  nn::Tensor stacked(nn::Shape{static_cast<int>(group.size()), s.c, s.h, s.w});
  std::vector<int> members;
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (!(group[i].shape == s)) throw ShapeError("loss_cons: features must share shape");
    std::copy(group[i].data.begin(), group[i].data.end(),
              stacked.data.begin() + static_cast<std::ptrdiff_t>(i * s.size()));
    members.push_back(static_cast<int>(i));
  }
  nn::Graph g;
  return g.value(g.consistency(g.input(std::move(stacked)), {members})).data[0];
}

}  // namespace unimatte
