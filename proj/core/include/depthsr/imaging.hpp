#pragma once

#include <array>
#include <vector>

#include "depthsr/image.hpp"

namespace depthsr {

// ---------------------------------------------------------------------------
// Bicubic resampling
// ---------------------------------------------------------------------------

/// Cubic convolution kernel parameter (Catmull-Rom family).
inline constexpr double kBicubicA = -0.5;

/// Cubic convolution weight for a tap at signed distance `x`.
double cubic_weight(double x, double a = kBicubicA);

/// Separable bicubic resampling with half-pixel-centered coordinates
/// (x_src = (x_dst + 0.5) * in/out - 0.5) and edge-clamped borders.
/// The result is not clipped.
Plane bicubic_resample(const Plane& src, int out_h, int out_w);

// ---------------------------------------------------------------------------
// Sobel gradients
// ---------------------------------------------------------------------------

/// Derivative kernels of size k x k, row-major. `x` differentiates along
/// columns, `y` along rows. Only k = 3 and k = 5 are supported.
struct SobelKernels {
  int size = 0;
  std::vector<double> x;
  std::vector<double> y;
};
SobelKernels sobel_kernels(int k);

struct SobelResponse {
  Plane gx;
  Plane gy;
  Plane magnitude;  // |gx| + |gy|
};

/// Correlation with both kernels under edge-clamp padding.
SobelResponse sobel(const Plane& img, int k = 5);

/// |gx| + |gy| with edge-clamp padding; output shape equals input shape.
Plane sobel_magnitude(const Plane& img, int k = 5);

/// Adjoint of `sobel` with respect to its input: given upstream gradients on
/// gx and gy, accumulate the gradient on the image.
Plane sobel_adjoint(const Plane& grad_gx, const Plane& grad_gy, int k = 5);

// ---------------------------------------------------------------------------
// SSIM
// ---------------------------------------------------------------------------

inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;  // (0.01 L)^2, L = 1
inline constexpr double kSsimC2 = 0.03 * 0.03;  // (0.03 L)^2

/// Normalized 1-D Gaussian taps (sum 1). The 2-D window is the outer product.
std::vector<double> gaussian_window(int k, double sigma = kSsimSigma);

struct SsimParams {
  int window = 11;
  double c1 = kSsimC1;
  double c2 = kSsimC2;
};

/// Mean SSIM over all fully-inside ("valid") window positions.
double ssim_mean(const Plane& a, const Plane& b, const SsimParams& params = {});

struct SsimGradient {
  double value = 0.0;
  Plane grad_a;  // d mean-SSIM / d a
};

/// Mean SSIM together with its analytic derivative with respect to `a`.
SsimGradient ssim_mean_with_gradient(const Plane& a, const Plane& b, const SsimParams& params = {});

}  // namespace depthsr
