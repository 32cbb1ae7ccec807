#pragma once

#include <cstdint>

#include "depthsr/image.hpp"

namespace depthsr {

/// Weights of the composite training loss.
struct LossWeights {
  double lambda1 = 0.1;  // L1
  double lambda2 = 1.0;  // edge
  double lambda3 = 1.0;  // structure

  void validate() const;
};

inline constexpr int kEdgeKernel = 5;
inline constexpr int kStructureWindow = 11;

struct LossTerm {
  double value = 0.0;
  Plane grad;
};

struct LossValue {
  double total = 0.0;
  double l1 = 0.0;
  double edge = 0.0;
  double structure = 0.0;
  Plane grad_wrt_prediction;
};

/// Mean absolute error; subgradient uses sign(0) = 0.
LossTerm l1_loss(const Plane& pred, const Plane& gt);

/// Mean absolute difference of 5x5 Sobel magnitudes.
LossTerm edge_loss(const Plane& pred, const Plane& gt);

/// 1 - mean SSIM (11x11 Gaussian window).
LossTerm structure_loss(const Plane& pred, const Plane& gt);

/// Weighted sum of the three terms. Terms with zero weight are skipped, so a
/// (1,0,0) weighting only needs the L1 preconditions.
LossValue total_loss(const Plane& pred, const Plane& gt, const LossWeights& w = {});

/// Hash of every sign/branch decision taken while evaluating the weighted
/// loss (L1 signs, Sobel signs, edge-difference signs). Two inputs with equal
/// signatures lie in the same differentiable piece of the loss.
std::uint64_t loss_branch_signature(const Plane& pred, const Plane& gt, const LossWeights& w);

}  // namespace depthsr
