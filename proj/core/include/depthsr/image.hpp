#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace depthsr {

/// Row-major 2-D array of doubles.
class Plane {
 public:
  Plane() = default;
  Plane(int height, int width, double fill = 0.0);
  Plane(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(int r, int c) { return values_[static_cast<std::size_t>(r) * width_ + c]; }
  double operator()(int r, int c) const { return values_[static_cast<std::size_t>(r) * width_ + c]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

  bool same_shape(const Plane& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool all_finite() const;

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

/// Single-channel depth grid. Values are normalized so that 1.0 corresponds
/// to `unit_scale` raw sensor units.
struct DepthMap {
  Plane values;
  std::vector<std::uint8_t> valid_mask;  // 1 = measured pixel
  double unit_scale = 65535.0;

  DepthMap() = default;
  /// Fully valid map.
  explicit DepthMap(Plane v, double unit_scale = 65535.0);
  DepthMap(Plane v, std::vector<std::uint8_t> mask, double unit_scale = 65535.0);

  int height() const { return values.height(); }
  int width() const { return values.width(); }
  bool valid(int r, int c) const {
    return valid_mask[static_cast<std::size_t>(r) * width() + c] != 0;
  }
  std::size_t valid_count() const;
  bool fully_valid() const { return valid_count() == values.size(); }

  /// Checks shape agreement, finiteness and the [0,1] range of valid pixels.
  void validate() const;
};

/// Three-channel guidance image, planar layout, values in [0,1].
class ColorImage {
 public:
  static constexpr int kChannels = 3;

  ColorImage() = default;
  ColorImage(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return kChannels; }

  double& at(int ch, int r, int c) {
    return values_[(static_cast<std::size_t>(ch) * height_ + r) * width_ + c];
  }
  double at(int ch, int r, int c) const {
    return values_[(static_cast<std::size_t>(ch) * height_ + r) * width_ + c];
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  Plane channel(int ch) const;
  /// ITU-R BT.601 luma (0.299, 0.587, 0.114).
  Plane luma() const;

  void validate() const;

  friend bool operator==(const ColorImage&, const ColorImage&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

Plane crop(const Plane& p, int row, int col, int height, int width);
ColorImage crop(const ColorImage& img, int row, int col, int height, int width);
DepthMap crop(const DepthMap& d, int row, int col, int height, int width);

/// Elementwise clamp to [0,1].
Plane clip_unit(Plane p);

}  // namespace depthsr
