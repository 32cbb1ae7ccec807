#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "depthsr/image.hpp"

namespace depthsr::png {

/// Single-channel 16-bit raster.
struct Gray16 {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> pixels;
};

/// Interleaved 8-bit RGB raster.
struct Rgb8 {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
};

/// Reads any non-16-bit-gray PNG as 8-bit RGB (palette, gray, alpha and
/// 16-bit inputs are converted).
Rgb8 read_rgb8(const std::string& path);
/// Reads a grayscale PNG. 16-bit samples are returned as-is; lower bit
/// depths are widened without rescaling.
Gray16 read_gray16(const std::string& path);

/// Writers go through a temporary file and rename, so a failed write never
/// leaves a partial file at `path`.
void write_rgb8(const std::string& path, const Rgb8& img);
void write_gray16(const std::string& path, const Gray16& img);

ColorImage to_color(const Rgb8& img);
Rgb8 from_color(const ColorImage& img);

}  // namespace depthsr::png
