#include "depthsr/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "depthsr/error.hpp"

namespace depthsr {

namespace {

double normalized_rmse(const DepthMap& pred, const DepthMap& gt) {
  DEPTHSR_REQUIRE(pred.height() == gt.height() && pred.width() == gt.width(), "metric inputs differ in shape");
  double sum = 0.0;
  std::size_t n = 0;
  auto p = pred.values.values();
  auto g = gt.values.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!gt.valid_mask[i]) continue;
    const double d = p[i] - g[i];
    sum += d * d;
    ++n;
  }
  DEPTHSR_REQUIRE(n > 0, "ground truth has no valid pixels");
  return std::sqrt(sum / static_cast<double>(n));
}

}  // namespace

double rmse(const DepthMap& pred, const DepthMap& gt, double report_scale) {
  return normalized_rmse(pred, gt) * report_scale;
}

double psnr(const DepthMap& pred, const DepthMap& gt) {
  const double e = normalized_rmse(pred, gt);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(1.0 / e);
}

double EvalReport::mean_rmse() const {
  DEPTHSR_REQUIRE(!per_image.empty(), "empty report");
  double s = 0.0;
  for (const auto& r : per_image) s += r.rmse;
  return s / static_cast<double>(per_image.size());
}

EvalReport evaluate(const SrMethod& method, const std::vector<SrSample>& samples, const EvalOptions& opts) {
  DEPTHSR_REQUIRE(!samples.empty(), "evaluate: no samples");
  EvalReport report;
  report.method = opts.method_name;
  report.config_digest = opts.config_digest;
  for (const SrSample& s : samples) {
    DepthMap pred;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      pred = method(s);
    } catch (const std::exception& e) {
      throw Error("method failed on sample '" + s.source_id + "': " + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EvalRow row;
    row.source_id = s.source_id;
    row.scale = s.scale;
    row.rmse = rmse(pred, s.hr_depth_gt, opts.report_scale);
    const double p = psnr(pred, s.hr_depth_gt);
    row.psnr_infinite = std::isinf(p);
    row.psnr = row.psnr_infinite ? kPsnrCap : std::min(p, kPsnrCap);
    row.seconds = secs;
    report.per_image.push_back(row);
    if (opts.on_prediction) opts.on_prediction(s, pred);
  }
  std::map<int, ScaleAverage> by_scale;
  for (const auto& r : report.per_image) {
    ScaleAverage& a = by_scale[r.scale];
    a.scale = r.scale;
    a.count += 1;
    a.rmse += r.rmse;
    a.psnr += r.psnr;
  }
  for (auto& [scale, a] : by_scale) {
    a.rmse /= static_cast<double>(a.count);
    a.psnr /= static_cast<double>(a.count);
    report.averages.push_back(a);
  }
  return report;
}

void write_report_csv(const std::string& path, const EvalReport& report) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp);
    DEPTHSR_REQUIRE(out.good(), "cannot write report " + path);
    out << "source_id,scale,rmse,psnr,seconds\n";
    char buf[256];
    for (const auto& r : report.per_image) {
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.6f", r.scale, r.rmse, r.psnr, r.seconds);
      out << r.source_id << "," << buf << "\n";
    }
    DEPTHSR_REQUIRE(out.good(), "failed writing report " + path);
  }
  std::filesystem::rename(tmp, path);
}

std::string format_summary(const EvalReport& report) {
  std::ostringstream os;
  char buf[160];
  os << "method: " << report.method;
  if (!report.config_digest.empty()) os << "  (config " << report.config_digest << ")";
  os << "\n";
  std::snprintf(buf, sizeof buf, "%-8s %8s %12s %12s\n", "scale", "images", "RMSE", "PSNR [dB]");
  os << buf;
  for (const auto& a : report.averages) {
    std::snprintf(buf, sizeof buf, "%-8s %8zu %12.4f %12.4f\n", (std::to_string(a.scale) + "x").c_str(), a.count,
                  a.rmse, a.psnr);
    os << buf;
  }
  return os.str();
}

png::Rgb8 error_heatmap(const DepthMap& pred, const DepthMap& gt, double max_error) {
  DEPTHSR_REQUIRE(pred.height() == gt.height() && pred.width() == gt.width(), "heatmap inputs differ in shape");
  DEPTHSR_REQUIRE(max_error > 0.0, "heatmap max_error must be positive");
  png::Rgb8 out{gt.height(), gt.width(), std::vector<std::uint8_t>(gt.values.size() * 3)};
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const double t = gt.valid_mask[i] ? std::min(1.0, std::abs(pred.values.values()[i] - gt.values.values()[i]) / max_error) : 0.0;
    // black -> red -> yellow -> white in three equal segments
    const double r = std::clamp(3.0 * t, 0.0, 1.0);
    const double g = std::clamp(3.0 * t - 1.0, 0.0, 1.0);
    const double b = std::clamp(3.0 * t - 2.0, 0.0, 1.0);
    out.pixels[3 * i] = static_cast<std::uint8_t>(std::lround(255.0 * r));
    out.pixels[3 * i + 1] = static_cast<std::uint8_t>(std::lround(255.0 * g));
    out.pixels[3 * i + 2] = static_cast<std::uint8_t>(std::lround(255.0 * b));
  }
  return out;
}

}  // namespace depthsr
