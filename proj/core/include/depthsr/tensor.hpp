#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "depthsr/error.hpp"

namespace depthsr {

/// Dense channels x height x width feature tensor.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, T fill = T(0))
      : channels_(channels), height_(height), width_(width) {
    DEPTHSR_REQUIRE(channels > 0 && height > 0 && width > 0, "tensor dimensions must be positive");
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
  bool empty() const { return data_.empty(); }

  T& operator()(int ch, int r, int c) { return data_[(static_cast<std::size_t>(ch) * height_ + r) * width_ + c]; }
  T operator()(int ch, int r, int c) const { return data_[(static_cast<std::size_t>(ch) * height_ + r) * width_ + c]; }

  T* channel(int ch) { return data_.data() + static_cast<std::size_t>(ch) * plane_size(); }
  const T* channel(int ch) const { return data_.data() + static_cast<std::size_t>(ch) * plane_size(); }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(const Tensor& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }
  bool all_finite() const {
    for (T v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(channels_, height_, width_);
    auto dst = out.values();
    for (std::size_t i = 0; i < data_.size(); ++i) dst[i] = static_cast<U>(data_[i]);
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

/// Encoder and decoder activations.
using FeatureMap = Tensor<double>;

}  // namespace depthsr
