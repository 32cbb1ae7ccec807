#pragma once

#include <map>
#include <string>

#include "depthsr/losses.hpp"
#include "depthsr/network.hpp"
#include "depthsr/sample.hpp"

namespace depthsr {

inline constexpr double kGradcheckGate = 1e-3;
inline constexpr double kGradcheckL1Gate = 1e-5;
/// Entries with |analytic| at or below this are not scored.
inline constexpr double kGradcheckFloor = 1e-6;

struct GradcheckOptions {
  double eps = 1e-4;
  std::uint64_t seed = 0;
  /// Configs with more parameters than this are checked on a random subsample.
  std::size_t full_check_limit = 5000;
  std::size_t subsample = 500;
  /// Scales every analytic gradient by 1.01 (negative control).
  bool inject_fault = false;
};

struct GroupError {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::string worst_entry;      // "<param>[index]"
  std::size_t checked = 0;      // scored entries
  std::size_t below_floor = 0;  // |analytic| <= floor
  std::size_t excluded = 0;     // every step size crossed a ReLU/pool/clip/sign boundary
  std::size_t total_params = 0;
  std::map<std::string, GroupError> groups;

  bool passed(double gate) const { return checked > 0 && max_rel_error < gate; }
};

/// Smooth sample used by the check: the prediction stays inside (0,1) and
/// away from the ground truth so L1 and clipping kinks are not straddled.
SrSample gradcheck_sample(const NetworkConfig& cfg, std::uint64_t seed);

/// Compares loss_gradients with central differences of loss_value.
GradcheckResult grad_check(const NetworkConfig& cfg, const LossWeights& w, const GradcheckOptions& opts = {});

/// Gate for a loss weighting: the tight bound when only the L1 term is on.
double gradcheck_gate(const LossWeights& w);

}  // namespace depthsr
