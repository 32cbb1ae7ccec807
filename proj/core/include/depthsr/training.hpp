#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "depthsr/losses.hpp"
#include "depthsr/network.hpp"
#include "depthsr/sample.hpp"

namespace depthsr {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 8;
  int epochs = 5;
  /// Stop after this many optimizer steps (0 = run all epochs).
  int max_steps = 0;
  LossWeights loss_weights;
  std::uint64_t seed = 0;
  int scale = 4;
  /// Save a checkpoint to `checkpoint_path` every this many steps (0 = never).
  int checkpoint_every = 0;
  std::string checkpoint_path;
  Precision precision = Precision::Double;
  /// Worker threads for per-sample gradients within a batch.
  int threads = 1;

  void validate() const;
};

struct TrainRecord {
  int step = 0;  // 1-based
  int epoch = 0; // 1-based
  double total = 0.0;
  double l1 = 0.0;
  double edge = 0.0;
  double structure = 0.0;
  double seconds = 0.0;  // wall time since training started
};

struct TrainLog {
  std::vector<TrainRecord> records;
  std::string final_digest;
  double learning_rate = 0.0;
  double beta1 = kAdamBeta1;
  double beta2 = kAdamBeta2;
  double epsilon = kAdamEpsilon;

  /// Loss columns only; wall time is excluded so reruns compare equal.
  bool same_losses(const TrainLog& other) const;
  /// `#` comment lines with the optimizer settings and final digest, then
  /// `step,epoch,total,l1,edge,structure,seconds`.
  void write_csv(const std::string& path) const;
};

struct TrainResult {
  Parameters params;
  TrainLog log;
};

/// ADAM state for one parameter set.
class Adam {
 public:
  Adam(const Parameters& like, double learning_rate);
  void step(Parameters& p, const Parameters& grad);
  long long steps() const { return t_; }

 private:
  double lr_;
  long long t_ = 0;
  Parameters m_;
  Parameters v_;
};

using ProgressFn = std::function<void(const TrainRecord&)>;

/// Mini-batch ADAM on `data`. Batches follow a per-epoch permutation seeded by
/// cfg.seed; the batch gradient is the mean of per-sample gradients summed in
/// sample order. Starts from `init` when given, else init_parameters(net_cfg).
TrainResult train(const TrainConfig& cfg, const std::vector<SrSample>& data, const NetworkConfig& net_cfg,
                  const std::optional<Parameters>& init = std::nullopt, const ProgressFn& progress = {});

/// Stderr progress line printer, rate-limited to every `every` steps.
ProgressFn stderr_progress(int every);

}  // namespace depthsr
