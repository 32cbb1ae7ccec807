#pragma once

#include "depthsr/image.hpp"
#include "depthsr/sample.hpp"

namespace depthsr {

inline constexpr int kGuidedFilterRadius = 8;
inline constexpr double kGuidedFilterEps = 1e-4;

/// Bicubic upscale of the low-resolution depth to the color size, clipped.
DepthMap bicubic_sr(const SrSample& sample);

/// Mean over the (2r+1)^2 window, truncated at the borders.
Plane box_mean(const Plane& src, int radius);

/// Gray-guide guided filter: a = cov(I,p)/(var(I)+eps), b = mean(p) - a mean(I),
/// output = mean(a) I + mean(b). Not clipped.
Plane guided_filter(const Plane& guide, const Plane& src, int radius, double eps);

/// Bicubic upscale followed by the guided filter with the luma of the color
/// image as guide, clipped to [0,1].
DepthMap guided_filter_sr(const SrSample& sample, int radius = kGuidedFilterRadius, double eps = kGuidedFilterEps);

}  // namespace depthsr
