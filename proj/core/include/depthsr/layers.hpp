#pragma once

#include <span>
#include <vector>

#include "depthsr/tensor.hpp"

// Differentiable building blocks. Convolutions are zero-padded, stride 1,
// "same" output size; weights are laid out [out][in][k][k]. The transposed
// convolution is fixed at kernel 2, stride 2 with weights [in][out][2][2].
// Backward functions accumulate into their gradient outputs.
namespace depthsr::layers {

template <typename T>
Tensor<T> conv2d(const Tensor<T>& in, std::span<const T> weight, std::span<const T> bias, int out_channels,
                 int ksize);

template <typename T>
void conv2d_backward(const Tensor<T>& in, std::span<const T> weight, int ksize, const Tensor<T>& grad_out,
                     Tensor<T>* grad_in, std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
Tensor<T> conv_transpose2x2(const Tensor<T>& in, std::span<const T> weight, std::span<const T> bias,
                            int out_channels);

template <typename T>
void conv_transpose2x2_backward(const Tensor<T>& in, std::span<const T> weight, const Tensor<T>& grad_out,
                                Tensor<T>* grad_in, std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
void relu_inplace(Tensor<T>& x);

/// Zeroes `grad` wherever the ReLU output was not positive.
template <typename T>
void relu_backward(const Tensor<T>& out, Tensor<T>& grad);

/// 2x2 stride-2 max pooling. `argmax` receives the flat input index of each
/// selected element; ties resolve to the first in row-major window order.
template <typename T>
Tensor<T> maxpool2(const Tensor<T>& in, std::vector<int>& argmax);

template <typename T>
void maxpool2_backward(const Tensor<T>& grad_out, const std::vector<int>& argmax, Tensor<T>& grad_in);

template <typename T>
Tensor<T> upsample_nearest2(const Tensor<T>& in);

template <typename T>
void upsample_nearest2_backward(const Tensor<T>& grad_out, Tensor<T>& grad_in);

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts);

}  // namespace depthsr::layers
