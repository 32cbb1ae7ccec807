#pragma once

#include <cstdint>
#include <vector>

#include "depthsr/sample.hpp"

namespace depthsr {

/// Generated scene plus the region label of every pixel (row-major).
struct SynthScene {
  RgbdPair pair;
  std::vector<int> labels;
  int region_count = 0;
};

/// Piecewise-planar RGB-D scene: 3-8 regions (background included), each an
/// axis-aligned rectangle or convex polygon with its own tilted depth plane
/// and a distinct albedo. Color texture noise is small enough that albedo
/// steps remain the only strong color edges. Requires h, w >= 64.
SynthScene synth_scene_detailed(std::uint64_t seed, int h, int w);

RgbdPair synth_scene(std::uint64_t seed, int h, int w);

}  // namespace depthsr
