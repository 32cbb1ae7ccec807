#pragma once

#include <functional>
#include <string>
#include <vector>

#include "depthsr/image.hpp"
#include "depthsr/png_io.hpp"
#include "depthsr/sample.hpp"

namespace depthsr {

inline constexpr double kDefaultReportScale = 255.0;
/// PSNR written to reports for exact reconstructions.
inline constexpr double kPsnrCap = 100.0;

/// Root-mean-squared error over gt's valid pixels, times `report_scale`.
double rmse(const DepthMap& pred, const DepthMap& gt, double report_scale = kDefaultReportScale);

/// 20 log10(1 / rmse) on the normalized range; +infinity when rmse is 0.
double psnr(const DepthMap& pred, const DepthMap& gt);

struct EvalRow {
  std::string source_id;
  int scale = 0;
  double rmse = 0.0;
  double psnr = 0.0;  // capped at kPsnrCap
  bool psnr_infinite = false;
  double seconds = 0.0;
};

struct ScaleAverage {
  int scale = 0;
  std::size_t count = 0;
  double rmse = 0.0;
  double psnr = 0.0;
};

struct EvalReport {
  std::string method;
  std::vector<EvalRow> per_image;
  std::vector<ScaleAverage> averages;  // ascending scale
  std::string config_digest;

  /// Mean RMSE over all rows regardless of scale.
  double mean_rmse() const;
};

using SrMethod = std::function<DepthMap(const SrSample&)>;

struct EvalOptions {
  std::string method_name = "method";
  double report_scale = kDefaultReportScale;
  std::string config_digest;
  /// Called after each sample with its prediction (for image dumps).
  std::function<void(const SrSample&, const DepthMap&)> on_prediction;
};

/// Runs `method` on every sample in order and aggregates per scale. A
/// failing sample aborts with an error naming it.
EvalReport evaluate(const SrMethod& method, const std::vector<SrSample>& samples, const EvalOptions& opts = {});

/// CSV with header `source_id,scale,rmse,psnr,seconds`.
void write_report_csv(const std::string& path, const EvalReport& report);
std::string format_summary(const EvalReport& report);

/// Absolute error rendered with a fixed black-red-yellow-white ramp that
/// saturates at `max_error` (normalized units), so maps are comparable
/// across runs.
inline constexpr double kHeatmapMaxError = 0.1;
png::Rgb8 error_heatmap(const DepthMap& pred, const DepthMap& gt, double max_error = kHeatmapMaxError);

}  // namespace depthsr
