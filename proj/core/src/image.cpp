#include "depthsr/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depthsr/error.hpp"

namespace depthsr {

namespace {
std::string dims(int h, int w) { return std::to_string(h) + "x" + std::to_string(w); }
}  // namespace

Plane::Plane(int height, int width, double fill) : height_(height), width_(width) {
  DEPTHSR_REQUIRE(height > 0 && width > 0, "plane dimensions must be positive, got " + dims(height, width));
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

Plane::Plane(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  DEPTHSR_REQUIRE(height > 0 && width > 0, "plane dimensions must be positive, got " + dims(height, width));
  DEPTHSR_REQUIRE(values_.size() == static_cast<std::size_t>(height) * width,
                  "plane value count does not match " + dims(height, width));
}

bool Plane::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DepthMap::DepthMap(Plane v, double scale)
    : values(std::move(v)), valid_mask(values.size(), 1), unit_scale(scale) {}

DepthMap::DepthMap(Plane v, std::vector<std::uint8_t> mask, double scale)
    : values(std::move(v)), valid_mask(std::move(mask)), unit_scale(scale) {
  DEPTHSR_REQUIRE(valid_mask.size() == values.size(), "depth mask and values differ in size");
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid_mask.begin(), valid_mask.end(),
                                                [](std::uint8_t m) { return m != 0; }));
}

void DepthMap::validate() const {
  DEPTHSR_REQUIRE(!values.empty(), "depth map is empty");
  DEPTHSR_REQUIRE(valid_mask.size() == values.size(), "depth mask and values differ in size");
  DEPTHSR_REQUIRE(unit_scale > 0.0 && std::isfinite(unit_scale), "depth unit_scale must be positive");
  const auto vals = values.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    DEPTHSR_REQUIRE(std::isfinite(vals[i]), "depth map contains a non-finite value");
    if (valid_mask[i]) {
      DEPTHSR_REQUIRE(vals[i] >= 0.0 && vals[i] <= 1.0, "valid depth value outside [0,1]");
    }
  }
}

ColorImage::ColorImage(int height, int width, double fill) : height_(height), width_(width) {
  DEPTHSR_REQUIRE(height > 0 && width > 0, "color dimensions must be positive, got " + dims(height, width));
  values_.assign(static_cast<std::size_t>(kChannels) * height * width, fill);
}

Plane ColorImage::channel(int ch) const {
  const auto n = static_cast<std::size_t>(height_) * width_;
  auto first = values_.begin() + static_cast<std::ptrdiff_t>(ch * n);
  return Plane(height_, width_, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
}

Plane ColorImage::luma() const {
  Plane out(height_, width_);
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c)
      out(r, c) = 0.299 * at(0, r, c) + 0.587 * at(1, r, c) + 0.114 * at(2, r, c);
  return out;
}

void ColorImage::validate() const {
  DEPTHSR_REQUIRE(!values_.empty(), "color image is empty");
  for (double v : values_) {
    DEPTHSR_REQUIRE(std::isfinite(v) && v >= 0.0 && v <= 1.0, "color value outside [0,1]");
  }
}

Plane crop(const Plane& p, int row, int col, int height, int width) {
  DEPTHSR_REQUIRE(row >= 0 && col >= 0 && row + height <= p.height() && col + width <= p.width(),
                  "crop window outside image");
  Plane out(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) out(r, c) = p(row + r, col + c);
  return out;
}

ColorImage crop(const ColorImage& img, int row, int col, int height, int width) {
  DEPTHSR_REQUIRE(row >= 0 && col >= 0 && row + height <= img.height() && col + width <= img.width(),
                  "crop window outside image");
  ColorImage out(height, width);
  for (int ch = 0; ch < ColorImage::kChannels; ++ch)
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) out.at(ch, r, c) = img.at(ch, row + r, col + c);
  return out;
}

DepthMap crop(const DepthMap& d, int row, int col, int height, int width) {
  Plane v = crop(d.values, row, col, height, width);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      mask[static_cast<std::size_t>(r) * width + c] = d.valid_mask[static_cast<std::size_t>(row + r) * d.width() + col + c];
  return DepthMap(std::move(v), std::move(mask), d.unit_scale);
}

Plane clip_unit(Plane p) {
  for (double& v : p.values()) v = std::clamp(v, 0.0, 1.0);
  return p;
}

}  // namespace depthsr
