#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "depthsr/image.hpp"
#include "depthsr/sample.hpp"

namespace depthsr {

inline constexpr double kDefaultDepthUnitScale = 65535.0;

// --- PNG-backed pairs ------------------------------------------------------

/// Depth from a 16-bit PNG: value = raw / unit_scale, raw 0 marks invalid.
DepthMap load_depth_png(const std::string& path, double unit_scale = kDefaultDepthUnitScale);
/// Inverse of load_depth_png; invalid pixels are written as 0.
void save_depth_png(const std::string& path, const DepthMap& depth);

ColorImage load_color_png(const std::string& path);
void save_color_png(const std::string& path, const ColorImage& color);

/// Loads a registered pair; `source_id` is the color file's stem.
RgbdPair load_rgbd(const std::string& color_path, const std::string& depth_path,
                   double unit_scale = kDefaultDepthUnitScale);
void save_rgbd(const RgbdPair& pair, const std::string& color_path, const std::string& depth_path);

// --- Datasets on disk ------------------------------------------------------

struct PairPaths {
  std::string source_id;
  std::filesystem::path color;
  std::filesystem::path depth;
};

inline constexpr const char* kManifestName = "manifest.txt";

/// Resolves a dataset location. A regular file is read as a manifest (one
/// `color,depth` pair per line, relative paths resolved against the file's
/// directory). A directory is scanned for `<stem>.png` / `<stem>_depth.png`.
/// Results are sorted by source_id.
std::vector<PairPaths> list_pairs(const std::filesystem::path& location);

std::vector<RgbdPair> load_dataset(const std::filesystem::path& location, double unit_scale = kDefaultDepthUnitScale);

/// Writes `<id>.png`, `<id>_depth.png` per pair plus a manifest.
void write_dataset(const std::filesystem::path& dir, const std::vector<RgbdPair>& pairs);

// --- Preprocessing ---------------------------------------------------------

/// Fills invalid pixels by repeated masked 3x3 mean diffusion, then smooths
/// the filled pixels once. Valid pixels are left untouched.
DepthMap complete_depth(const DepthMap& d);

/// Bicubic degradation by `scale` (2, 4, 8 or 16), clipped to [0,1].
SrSample make_sr_sample(const RgbdPair& pair, int scale);

struct PatchSet {
  std::vector<RgbdPair> patches;
  int patch_size = 0;
  int stride = 0;
  bool augmented = false;
};

/// Number of fully-inside windows: (floor((H-size)/stride)+1) * (floor((W-size)/stride)+1).
std::size_t patch_count(int height, int width, int size, int stride);

PatchSet extract_patches(const RgbdPair& pair, int size = 128, int stride = 32);

/// rotated(r, c) = original(N-1-c, r) for an N x N patch.
RgbdPair rotate90(const RgbdPair& patch);

/// [patch, rotate90(patch)].
std::vector<RgbdPair> augment_rot90(const RgbdPair& patch);

}  // namespace depthsr
