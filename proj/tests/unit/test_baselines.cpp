#include <gtest/gtest.h>

#include <random>

#include "depthsr/baselines.hpp"
#include "depthsr/error.hpp"
#include "depthsr/imaging.hpp"
#include "test_util.hpp"

using namespace depthsr;
using depthsr::testing::random_plane;
using depthsr::testing::random_sample;

namespace {

Plane brute_box(const Plane& p, int r) {
  Plane out(p.height(), p.width());
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) {
      double s = 0;
      int n = 0;
      for (int yy = y - r; yy <= y + r; ++yy)
        for (int xx = x - r; xx <= x + r; ++xx) {
          if (yy < 0 || xx < 0 || yy >= p.height() || xx >= p.width()) continue;
          s += p(yy, xx);
          ++n;
        }
      out(y, x) = s / n;
    }
  return out;
}

double max_diff(const Plane& a, const Plane& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST(BoxMean, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  const Plane p = random_plane(rng, 13, 19);
  for (int r : {0, 1, 3, 8}) EXPECT_LT(max_diff(box_mean(p, r), brute_box(p, r)), 1e-12);
}

TEST(GuidedFilter, ConstantSourceIsFixedPoint) {
  std::mt19937_64 rng(2);
  const Plane guide = random_plane(rng, 24, 24);
  const Plane out = guided_filter(guide, Plane(24, 24, 0.37), 4, 1e-3);
  for (double v : out.values()) EXPECT_NEAR(v, 0.37, 1e-12);
}

TEST(GuidedFilter, SelfGuidedSmallEpsIsNearIdentity) {
  std::mt19937_64 rng(3);
  const Plane p = random_plane(rng, 32, 32);
  EXPECT_LT(max_diff(guided_filter(p, p, 4, 1e-8), p), 1e-3);
}

TEST(GuidedFilter, LargeEpsTendsToDoubleBoxMean) {
  std::mt19937_64 rng(4);
  const Plane guide = random_plane(rng, 24, 24);
  const Plane src = random_plane(rng, 24, 24);
  EXPECT_LT(max_diff(guided_filter(guide, src, 3, 1e9), brute_box(brute_box(src, 3), 3)), 1e-8);
}

TEST(GuidedFilter, LinearInSource) {
  std::mt19937_64 rng(5);
  const Plane g = random_plane(rng, 20, 20);
  const Plane a = random_plane(rng, 20, 20);
  const Plane b = random_plane(rng, 20, 20);
  Plane mix(20, 20);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = 2 * a.values()[i] - 0.5 * b.values()[i];
  const Plane fa = guided_filter(g, a, 3, 1e-2), fb = guided_filter(g, b, 3, 1e-2);
  const Plane fm = guided_filter(g, mix, 3, 1e-2);
  for (std::size_t i = 0; i < mix.size(); ++i)
    EXPECT_NEAR(fm.values()[i], 2 * fa.values()[i] - 0.5 * fb.values()[i], 1e-10);
}

TEST(GuidedFilter, Preconditions) {
  EXPECT_THROW(guided_filter(Plane(8, 8), Plane(8, 8), 4, 1e-3), ValidationError);
  EXPECT_THROW(guided_filter(Plane(20, 20), Plane(20, 21), 2, 1e-3), ValidationError);
  EXPECT_THROW(guided_filter(Plane(20, 20), Plane(20, 20), 2, 0.0), ValidationError);
}

TEST(Baselines, BicubicSrIsClippedUpscale) {
  std::mt19937_64 rng(6);
  const SrSample s = random_sample(rng, 32, 4);
  const DepthMap up = bicubic_sr(s);
  EXPECT_EQ(up.values, clip_unit(bicubic_resample(s.lr_depth.values, 32, 32)));
}

TEST(Baselines, GuidedSrShapeAndRange) {
  std::mt19937_64 rng(7);
  const SrSample s = random_sample(rng, 64, 4);
  const DepthMap out = guided_filter_sr(s);
  EXPECT_EQ(out.height(), 64);
  for (double v : out.values.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
