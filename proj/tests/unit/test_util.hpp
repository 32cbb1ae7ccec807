#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "depthsr/image.hpp"
#include "depthsr/sample.hpp"

namespace depthsr::testing {

inline Plane random_plane(std::mt19937_64& rng, int h, int w, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Plane p(h, w);
  for (double& v : p.values()) v = u(rng);
  return p;
}

inline ColorImage random_color(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ColorImage img(h, w);
  for (double& v : img.values()) v = u(rng);
  return img;
}

inline SrSample random_sample(std::mt19937_64& rng, int hr, int scale) {
  SrSample s;
  s.scale = scale;
  s.lr_depth = DepthMap(random_plane(rng, hr / scale, hr / scale, 0.2, 0.8));
  s.hr_color = random_color(rng, hr, hr);
  s.hr_depth_gt = DepthMap(random_plane(rng, hr, hr, 0.2, 0.8));
  s.source_id = "random";
  return s;
}

inline double dot(const Plane& a, const Plane& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("depthsr_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace depthsr::testing
