#pragma once

#include <string>
#include <vector>

#include "depthsr/baselines.hpp"
#include "depthsr/network.hpp"
#include "depthsr/training.hpp"

namespace depthsr::cli {

/// Settings merged from an INI-style file:
///
///   [data]     scale, patch, stride, rot90, unit_scale
///   [network]  levels, base_channels, dense_layers, dense_growth,
///              transition_channels, depth_channels, decoder_channels,
///              upsample_mode, residual, seed
///   [train]    learning_rate, batch_size, epochs, max_steps, seed,
///              checkpoint_every, precision, threads
///   [loss]     lambda1, lambda2, lambda3
///   [eval]     method, gf_radius, gf_eps, report_scale
struct RunConfig {
  NetworkConfig network = NetworkConfig::toy();
  TrainConfig train;
  int patch = 128;
  int stride = 32;
  bool rot90 = false;
  double unit_scale = 65535.0;
  std::string method = "mpfn";
  int gf_radius = kGuidedFilterRadius;
  double gf_eps = kGuidedFilterEps;
  double report_scale = 255.0;

  /// Names of every key that was set from a file, as `section.key`.
  std::vector<std::string> keys_from_file;

  void validate() const;
};

/// Every accepted `section.key`, in schema order.
std::vector<std::string> config_schema();

RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace depthsr::cli
