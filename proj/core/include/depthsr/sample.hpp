#pragma once

#include <string>

#include "depthsr/image.hpp"

namespace depthsr {

/// Registered color + depth pair of identical size.
struct RgbdPair {
  ColorImage color;
  DepthMap depth;
  std::string source_id;

  void validate() const;
};

/// One super-resolution training/evaluation unit.
struct SrSample {
  DepthMap lr_depth;
  ColorImage hr_color;
  DepthMap hr_depth_gt;
  int scale = 0;
  std::string source_id;

  /// Checks hr = scale * lr and gt/color agreement. Does not restrict the
  /// scale to the supported set, so degenerate rigs (scale 1) can be built.
  void validate() const;
};

bool is_supported_scale(int s);

}  // namespace depthsr
