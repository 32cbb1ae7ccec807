#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "depthsr/baselines.hpp"
#include "depthsr/error.hpp"
#include "depthsr/metrics.hpp"
#include "test_util.hpp"

using namespace depthsr;
using depthsr::testing::random_plane;
using depthsr::testing::random_sample;
using depthsr::testing::TempDir;

TEST(Metrics, UniformErrorScalesToReportRange) {
  const DepthMap gt(Plane(8, 8, 0.5));
  const DepthMap pred(Plane(8, 8, 0.5 + 0.02));
  EXPECT_NEAR(rmse(pred, gt), 255 * 0.02, 1e-9);
  EXPECT_NEAR(rmse(pred, gt, 1.0), 0.02, 1e-12);
  EXPECT_NEAR(psnr(pred, gt), 20 * std::log10(1 / 0.02), 1e-9);
}

TEST(Metrics, IdenticalImagesGiveZeroAndInfinity) {
  std::mt19937_64 rng(1);
  const DepthMap a(random_plane(rng, 6, 6));
  EXPECT_EQ(rmse(a, a), 0.0);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Metrics, SymmetricAndMaskAware) {
  std::mt19937_64 rng(2);
  const DepthMap a(random_plane(rng, 10, 10));
  const DepthMap b(random_plane(rng, 10, 10));
  EXPECT_DOUBLE_EQ(rmse(a, b), rmse(b, a));
  std::vector<std::uint8_t> mask(100, 1);
  mask[0] = 0;
  Plane off = a.values;
  off(0, 0) += 0.7;
  const DepthMap masked_gt(a.values, mask);
  EXPECT_EQ(rmse(DepthMap(off), masked_gt), 0.0);
  EXPECT_THROW(rmse(DepthMap(Plane(3, 3)), DepthMap(Plane(3, 3), std::vector<std::uint8_t>(9, 0))), ValidationError);
  EXPECT_THROW(rmse(DepthMap(Plane(3, 3)), DepthMap(Plane(3, 4))), ValidationError);
}

TEST(Evaluate, AveragesRecomputeFromRows) {
  std::mt19937_64 rng(3);
  std::vector<SrSample> samples;
  for (int s : {2, 4, 2, 4, 4}) samples.push_back(random_sample(rng, 32, s));
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].source_id = "s" + std::to_string(i);
  EvalOptions opts;
  opts.method_name = "bicubic";
  const EvalReport r = evaluate(bicubic_sr, samples, opts);
  ASSERT_EQ(r.per_image.size(), 5u);
  ASSERT_EQ(r.averages.size(), 2u);
  for (const ScaleAverage& a : r.averages) {
    double rm = 0, ps = 0;
    std::size_t n = 0;
    for (const EvalRow& row : r.per_image)
      if (row.scale == a.scale) {
        rm += row.rmse;
        ps += row.psnr;
        ++n;
      }
    EXPECT_EQ(a.count, n);
    EXPECT_NEAR(a.rmse, rm / n, 1e-12);
    EXPECT_NEAR(a.psnr, ps / n, 1e-12);
  }
  EXPECT_EQ(r.averages[0].scale, 2);
  EXPECT_EQ(r.per_image[3].source_id, "s3");
  EXPECT_NEAR(r.per_image[1].rmse, rmse(bicubic_sr(samples[1]), samples[1].hr_depth_gt), 1e-15);
}

TEST(Evaluate, BicubicOnConstantsIsExact) {
  SrSample s;
  s.scale = 4;
  s.hr_color = ColorImage(32, 32, 0.2);
  s.hr_depth_gt = DepthMap(Plane(32, 32, 0.6));
  s.lr_depth = DepthMap(Plane(8, 8, 0.6));
  s.source_id = "flat";
  const EvalReport r = evaluate(bicubic_sr, {s});
  EXPECT_EQ(r.per_image[0].rmse, 0.0);
  EXPECT_TRUE(r.per_image[0].psnr_infinite);
  EXPECT_EQ(r.per_image[0].psnr, kPsnrCap);
}

TEST(Evaluate, FailingSampleIsNamed) {
  std::mt19937_64 rng(4);
  SrSample s = random_sample(rng, 16, 2);
  s.source_id = "broken_one";
  try {
    evaluate([](const SrSample&) -> DepthMap { throw ValidationError("boom"); }, {s});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("broken_one"), std::string::npos);
  }
  EXPECT_THROW(evaluate(bicubic_sr, {}), ValidationError);
}

TEST(Report, CsvHasHeaderAndOneRowPerImage) {
  TempDir dir("csv");
  std::mt19937_64 rng(5);
  std::vector<SrSample> samples = {random_sample(rng, 16, 2), random_sample(rng, 16, 2)};
  samples[0].source_id = "a";
  samples[1].source_id = "b";
  const EvalReport r = evaluate(bicubic_sr, samples);
  write_report_csv(dir.file("r.csv"), r);
  std::ifstream in(dir.file("r.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "source_id,scale,rmse,psnr,seconds");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream ls(line);
    std::string id, scale, rm;
    std::getline(ls, id, ',');
    std::getline(ls, scale, ',');
    std::getline(ls, rm, ',');
    EXPECT_EQ(scale, "2");
    EXPECT_NEAR(std::stod(rm), r.per_image[static_cast<std::size_t>(rows - 1)].rmse, 1e-6);
  }
  EXPECT_EQ(rows, 2);
  EXPECT_FALSE(std::filesystem::exists(dir.file("r.csv.partial")));
  EXPECT_NE(format_summary(r).find("2x"), std::string::npos);
}

TEST(Heatmap, FixedRampEndpoints) {
  const DepthMap gt(Plane(1, 4, 0.5));
  Plane p(1, 4, std::vector<double>{0.5, 0.5 + kHeatmapMaxError / 3, 0.5 - 2 * kHeatmapMaxError / 3, 0.5 + 5 * kHeatmapMaxError});
  const png::Rgb8 h = error_heatmap(DepthMap(p), gt);
  const std::vector<std::uint8_t> want = {0, 0, 0, 255, 0, 0, 255, 255, 0, 255, 255, 255};
  EXPECT_EQ(h.pixels, want);
}
