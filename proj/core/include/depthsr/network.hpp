#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depthsr/image.hpp"
#include "depthsr/losses.hpp"
#include "depthsr/sample.hpp"
#include "depthsr/tensor.hpp"

namespace depthsr {

enum class UpsampleMode { NearestConv, TransposedConv };

std::string to_string(UpsampleMode m);
UpsampleMode parse_upsample_mode(const std::string& s);

enum class Precision { Double, Single };

std::string to_string(Precision p);
Precision parse_precision(const std::string& s);

/// Architecture hyperparameters of the progressive fusion network.
///
/// The color encoder produces `levels` features at 1/2 .. 1/2^levels of the
/// input resolution; the depth encoder produces `levels + 1` features at
/// 1 .. 1/2^levels. The reconstruction branch has one first fusion, `levels-1`
/// middle fusions and one last fusion; `decoder_channels` lists their widths
/// in that order (size levels + 1).
struct NetworkConfig {
  int levels = 3;
  int base_channels = 8;         // color stem width
  int dense_layers_per_block = 2;
  int dense_growth = 4;
  int transition_channels = 4;   // color convpool width after each dense block
  int depth_channels = 3;        // width of every depth-encoder layer
  std::vector<int> decoder_channels = {4, 4, 4, 4};
  UpsampleMode upsample_mode = UpsampleMode::NearestConv;
  bool residual = true;          // add the bicubic upscale to the network output
  std::uint64_t seed = 0;

  /// Desk-scale default (< 5000 parameters).
  static NetworkConfig toy();
  /// DenseNet-121-like widths with five levels.
  static NetworkConfig full_scale();

  void validate() const;
  /// Input height/width must be a multiple of this (2^(levels+1)).
  int size_multiple() const { return 1 << (levels + 1); }

  /// `key = value` lines; parse() accepts exactly what serialize() emits.
  std::string serialize() const;
  static NetworkConfig parse(const std::string& text);

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// One named learnable array, row-major.
struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const ParamTensor&, const ParamTensor&) = default;
};

/// Ordered, uniquely named collection of weights and biases. Also used to
/// hold gradients with the same layout.
class Parameters {
 public:
  Parameters() = default;
  explicit Parameters(std::vector<ParamTensor> tensors);

  const std::vector<ParamTensor>& tensors() const { return tensors_; }
  std::vector<ParamTensor>& tensors() { return tensors_; }

  const ParamTensor* find(const std::string& name) const;
  ParamTensor& at(const std::string& name);
  const ParamTensor& at(const std::string& name) const;

  std::size_t count() const;
  Parameters zeros_like() const;
  bool all_finite() const;
  std::string digest() const;

  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  std::vector<ParamTensor> tensors_;
};

/// Names and shapes of every parameter for a config, in canonical order.
std::vector<std::pair<std::string, std::vector<int>>> parameter_layout(const NetworkConfig& cfg);

/// One reconstruction step: the previous decoder feature is fused with the
/// color feature `color_index` and depth feature `depth_index` (1-based, in
/// the module numbering where k = levels + 2) at the given resolution.
struct FusionStep {
  int i = 0;
  int color_index = 0;  // m = k - i - 2
  int depth_index = 0;  // n = k - i - 1
  int height = 0;
  int width = 0;
};

/// Resolution bookkeeping for the middle fusions. Color feature n lives at
/// H/2^n and depth feature n at H/2^(n-1), so the color branch takes m and
/// the depth branch takes n. Construction fails if any fused triple would
/// disagree spatially.
struct FusionSchedule {
  int k = 0;
  std::vector<FusionStep> steps;
  std::string role_assignment;

  static FusionSchedule build(const NetworkConfig& cfg, int height, int width);
};

Parameters init_parameters(const NetworkConfig& cfg);

/// Color encoder: convpool stem then (dense block, convpool) per level.
std::vector<FeatureMap> color_encoder_forward(const ColorImage& img, const NetworkConfig& cfg,
                                              const Parameters& p);

/// Depth encoder on an already upscaled depth map: two 3x3 layers at full
/// resolution then one convpool per level.
std::vector<FeatureMap> depth_encoder_forward(const DepthMap& depth_up, const NetworkConfig& cfg,
                                              const Parameters& p);

/// Middle fusion `step` (1-based): concat, 3x3 conv + ReLU, 2x upsampling stage.
FeatureMap fusion_step(const FeatureMap& prev, const FeatureMap& color_feat, const FeatureMap& depth_feat,
                       const NetworkConfig& cfg, const Parameters& p, int step);

struct FusionStepGradients {
  FeatureMap value;
  FeatureMap grad_prev;
  FeatureMap grad_color;
  FeatureMap grad_depth;
};

/// Gradient of sum(weights * output) of a middle fusion with respect to its
/// three inputs.
FusionStepGradients fusion_step_input_gradients(const FeatureMap& prev, const FeatureMap& color_feat,
                                                const FeatureMap& depth_feat, const NetworkConfig& cfg,
                                                const Parameters& p, int step, const FeatureMap& weights);

/// End-to-end super-resolution of `lr_depth` guided by `hr_color`.
DepthMap forward(const DepthMap& lr_depth, const ColorImage& hr_color, const NetworkConfig& cfg,
                 const Parameters& p, Precision precision = Precision::Double);

struct ForwardTrace {
  Plane upscaled;      // bicubic input upscale
  Plane network_out;   // residual branch output
  Plane pre_clip;
  Plane prediction;    // clipped
};

ForwardTrace forward_trace(const DepthMap& lr_depth, const ColorImage& hr_color, const NetworkConfig& cfg,
                           const Parameters& p);

struct LossGradients {
  LossValue loss;
  Parameters grads;
};

LossGradients loss_gradients(const SrSample& sample, const NetworkConfig& cfg, const Parameters& p,
                             const LossWeights& w, Precision precision = Precision::Double);

/// Hash of every ReLU mask, pooling choice, clip decision and loss sign taken
/// by one evaluation. Equal signatures mean the same differentiable piece.
std::uint64_t branch_signature(const SrSample& sample, const NetworkConfig& cfg, const Parameters& p,
                               const LossWeights& w);

/// Scalar loss only (for finite differences).
double loss_value(const SrSample& sample, const NetworkConfig& cfg, const Parameters& p, const LossWeights& w);

}  // namespace depthsr
