// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <span>
#include <vector>

#include "unimatte/autograd.hpp"
#include "unimatte/field.hpp"

namespace unimatte {

inline constexpr double kCrossEntropyEps = 1e-7;

/// Mean binary cross-entropy; probabilities are clamped to [eps, 1 - eps].
double loss_ce(std::span<const double> prob, std::span<const double> target,
               double eps = kCrossEntropyEps);
double loss_ce(const Plane& mask_prob, const BinaryMask& m_gt);

/// Mean absolute difference.
double loss_l1(std::span<const double> pred, std::span<const double> target);
double loss_l1(const Alpha& pred, const Alpha& gt);

/// loss_ce + lambda * loss_l1. Throws on negative lambda.
double loss_final(const Plane& mask_prob, const BinaryMask& m_gt, const Alpha& alpha_pred,
                  const Alpha& alpha_gt, double lambda);

/// Pairwise Jensen-Shannon consistency of G >= 2 same-shaped C x H x W features:
/// per-channel spatial softmax, JS averaged over channels and over all unordered pairs.
double loss_cons(const std::vector<nn::Tensor>& group);

}  // namespace unimatte
