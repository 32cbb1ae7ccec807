#include "depthsr/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "depthsr/error.hpp"

namespace depthsr {

namespace {

// Platform-independent draws on top of mt19937_64's specified output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::mt19937_64 eng_;
};

struct Region {
  double base = 0.5;
  double tilt_x = 0.0;
  double tilt_y = 0.0;
  std::array<double, 3> albedo{};
};

constexpr double kMinDepthGap = 0.06;
constexpr double kMinAlbedoGap = 0.45;  // L1 over the three channels
constexpr double kTextureNoise = 0.02;

struct Point {
  double x, y;
};

bool inside_convex(const std::vector<Point>& poly, double x, double y) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    if ((b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x) < 0.0) return false;
  }
  return true;
}

Region draw_region(Rng& rng, const std::vector<Region>& existing) {
  Region reg;
  for (int attempt = 0; attempt < 200; ++attempt) {
    reg.base = rng.uniform(0.15, 0.85);
    bool ok = true;
    for (const Region& e : existing) ok = ok && std::abs(e.base - reg.base) >= kMinDepthGap;
    if (ok) break;
  }
  reg.tilt_x = rng.uniform(-0.08, 0.08);
  reg.tilt_y = rng.uniform(-0.08, 0.08);
  for (int attempt = 0; attempt < 500; ++attempt) {
    for (double& a : reg.albedo) a = rng.uniform(0.1, 0.9);
    bool ok = true;
    for (const Region& e : existing) {
      double d = 0.0;
      for (int ch = 0; ch < 3; ++ch) d += std::abs(e.albedo[static_cast<std::size_t>(ch)] - reg.albedo[static_cast<std::size_t>(ch)]);
      ok = ok && d >= kMinAlbedoGap;
    }
    if (ok) break;
  }
  return reg;
}

}  // namespace

SynthScene synth_scene_detailed(std::uint64_t seed, int h, int w) {
  DEPTHSR_REQUIRE(h >= 64 && w >= 64, "synth_scene: height and width must be at least 64");
  Rng rng(seed);
  SynthScene scene;
  scene.region_count = rng.integer(3, 8);
  scene.labels.assign(static_cast<std::size_t>(h) * w, 0);

  std::vector<Region> regions;
  regions.push_back(draw_region(rng, regions));
  for (int k = 1; k < scene.region_count; ++k) {
    regions.push_back(draw_region(rng, regions));
    if (rng.uniform() < 0.5) {
      const int rh = rng.integer(h / 8, h * 3 / 5);
      const int rw = rng.integer(w / 8, w * 3 / 5);
      const int r0 = rng.integer(0, h - rh);
      const int c0 = rng.integer(0, w - rw);
      for (int r = r0; r < r0 + rh; ++r)
        for (int c = c0; c < c0 + rw; ++c) scene.labels[static_cast<std::size_t>(r) * w + c] = k;
    } else {
      const int corners = rng.integer(3, 5);
      const double cx = rng.uniform(0.15, 0.85) * w;
      const double cy = rng.uniform(0.15, 0.85) * h;
      const double radius = rng.uniform(0.12, 0.35) * std::min(h, w);
      std::vector<double> angles;
      for (int i = 0; i < corners; ++i) angles.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
      std::sort(angles.begin(), angles.end());
      std::vector<Point> poly;
      for (double a : angles) poly.push_back({cx + radius * std::cos(a), cy + radius * std::sin(a)});
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          if (inside_convex(poly, c + 0.5, r + 0.5)) scene.labels[static_cast<std::size_t>(r) * w + c] = k;
    }
  }

  Plane depth(h, w);
  ColorImage color(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const Region& reg = regions[static_cast<std::size_t>(scene.labels[static_cast<std::size_t>(r) * w + c])];
      const double x = (c + 0.5) / w - 0.5;
      const double y = (r + 0.5) / h - 0.5;
      depth(r, c) = std::clamp(reg.base + reg.tilt_x * x + reg.tilt_y * y, 0.05, 0.95);
      for (int ch = 0; ch < 3; ++ch)
        color.at(ch, r, c) =
            std::clamp(reg.albedo[static_cast<std::size_t>(ch)] + rng.uniform(-kTextureNoise, kTextureNoise), 0.0, 1.0);
    }
  scene.pair = RgbdPair{std::move(color), DepthMap(std::move(depth)), "synth_" + std::to_string(seed)};
  return scene;
}

RgbdPair synth_scene(std::uint64_t seed, int h, int w) { return synth_scene_detailed(seed, h, w).pair; }

}  // namespace depthsr
