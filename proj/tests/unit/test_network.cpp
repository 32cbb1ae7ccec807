#include <gtest/gtest.h>

#include <random>
#include <set>
#include <thread>

#include "depthsr/baselines.hpp"
#include "depthsr/error.hpp"
#include "depthsr/imaging.hpp"
#include "depthsr/network.hpp"
#include "test_util.hpp"

using namespace depthsr;
using depthsr::testing::random_color;
using depthsr::testing::random_plane;
using depthsr::testing::random_sample;

namespace {

// Parameter count derived from the architecture description, layer by layer.
std::size_t count_by_walking(const NetworkConfig& c) {
  const bool tconv = c.upsample_mode == UpsampleMode::TransposedConv;
  auto conv = [](std::size_t in, std::size_t out, std::size_t k = 3) { return in * out * k * k + out; };
  auto up = [&](std::size_t in, std::size_t out) { return tconv ? conv(in, out, 2) : conv(in, out); };
  std::size_t n = conv(3, c.base_channels);
  std::vector<std::size_t> color_width = {0, static_cast<std::size_t>(c.base_channels)};
  std::size_t width = c.base_channels;
  for (int l = 2; l <= c.levels; ++l) {
    for (int j = 0; j < c.dense_layers_per_block; ++j) n += conv(width + j * c.dense_growth, c.dense_growth);
    n += conv(width + c.dense_layers_per_block * c.dense_growth, c.transition_channels);
    width = c.transition_channels;
    color_width.push_back(width);
  }
  const std::size_t d = c.depth_channels;
  n += conv(1, d) + conv(d, d) + c.levels * conv(d, d);
  const auto& dec = c.decoder_channels;
  n += up(width + d, dec[0]);
  const int k = c.levels + 2;
  for (int i = 1; i <= c.levels - 1; ++i) {
    const int m = k - i - 2;
    n += conv(dec[i - 1] + color_width[m] + d, dec[i]) + up(dec[i], dec[i]);
  }
  const std::size_t last = dec[c.levels];
  n += conv(dec[c.levels - 1] + 3 + d, last) + conv(last, last) + conv(last, 1);
  return n;
}

NetworkConfig with_levels(int levels) {
  NetworkConfig c = NetworkConfig::toy();
  c.levels = levels;
  c.decoder_channels.assign(static_cast<std::size_t>(levels + 1), 4);
  return c;
}

}  // namespace

TEST(NetworkConfig, ToyDefaultsAndBudget) {
  const NetworkConfig c = NetworkConfig::toy();
  EXPECT_EQ(c.levels, 3);
  EXPECT_EQ(c.base_channels, 8);
  EXPECT_EQ(c.dense_layers_per_block, 2);
  EXPECT_EQ(c.dense_growth, 4);
  EXPECT_EQ(count_by_walking(c), 4819u);
  EXPECT_EQ(init_parameters(c).count(), 4819u);
  EXPECT_LE(init_parameters(c).count(), 5000u);
}

TEST(NetworkConfig, ParameterCountMatchesShapeWalker) {
  for (int levels : {2, 3, 4, 5})
    for (auto mode : {UpsampleMode::NearestConv, UpsampleMode::TransposedConv}) {
      NetworkConfig c = with_levels(levels);
      c.upsample_mode = mode;
      EXPECT_EQ(init_parameters(c).count(), count_by_walking(c)) << levels << " " << to_string(mode);
    }
  EXPECT_EQ(init_parameters(NetworkConfig::full_scale()).count(), count_by_walking(NetworkConfig::full_scale()));
}

TEST(NetworkConfig, SerializeParseRoundTrip) {
  for (NetworkConfig c : {NetworkConfig::toy(), NetworkConfig::full_scale()}) {
    c.seed = 12345678901ULL;
    c.upsample_mode = UpsampleMode::TransposedConv;
    c.residual = false;
    EXPECT_EQ(NetworkConfig::parse(c.serialize()), c);
  }
}

TEST(NetworkConfig, ParseRejectsBadInput) {
  EXPECT_THROW(NetworkConfig::parse("levels = 3\nwidth = 4\n"), ValidationError);
  EXPECT_THROW(NetworkConfig::parse("levels = three\n"), ValidationError);
  EXPECT_THROW(NetworkConfig::parse("levels = 1\n"), ValidationError);
  EXPECT_THROW(NetworkConfig::parse("decoder_channels = 4,4\n"), ValidationError);
  EXPECT_THROW(NetworkConfig::parse("upsample_mode = bilinear\n"), ValidationError);
  const NetworkConfig b = NetworkConfig::parse("levels = 4\ndecoder_channels = 6\n");
  EXPECT_EQ(b.decoder_channels, std::vector<int>(5, 6));
}

TEST(Parameters, InitIsSeededAndNamedUniquely) {
  NetworkConfig c = NetworkConfig::toy();
  const Parameters a = init_parameters(c);
  EXPECT_EQ(a, init_parameters(c));
  c.seed = 1;
  EXPECT_NE(a, init_parameters(c));
  std::set<std::string> names;
  for (const auto& t : a.tensors()) EXPECT_TRUE(names.insert(t.name).second) << t.name;
  for (const auto& t : a.tensors())
    if (t.name.ends_with(".bias")) {
      for (double v : t.values) EXPECT_EQ(v, 0.0);
    }
  EXPECT_EQ(a.digest(), init_parameters(NetworkConfig::toy()).digest());
  EXPECT_THROW(Parameters({{"x", {1}, {0.0}}, {"x", {1}, {0.0}}}), ValidationError);
}

TEST(FusionSchedule, ClosureForAllLevelsAndSizes) {
  for (int levels : {2, 3, 4, 5})
    for (int size : {64, 128, 256}) {
      const FusionSchedule s = FusionSchedule::build(with_levels(levels), size, size);
      EXPECT_EQ(s.k, levels + 2);
      ASSERT_EQ(s.steps.size(), static_cast<std::size_t>(levels - 1));
      for (const FusionStep& st : s.steps) {
        EXPECT_EQ(st.color_index, s.k - st.i - 2);
        EXPECT_EQ(st.depth_index, s.k - st.i - 1);
        const int prev_res = size >> (levels - st.i);
        EXPECT_EQ(st.height, prev_res);
        EXPECT_EQ(size >> st.color_index, prev_res);
        EXPECT_EQ(size >> (st.depth_index - 1), prev_res);
      }
    }
}

TEST(FusionSchedule, EncoderOutputsAgreeWithSchedule) {
  std::mt19937_64 rng(3);
  for (int levels : {2, 3, 4, 5}) {
    const NetworkConfig c = with_levels(levels);
    const Parameters p = init_parameters(c);
    const int size = 64;
    const auto color = color_encoder_forward(random_color(rng, size, size), c, p);
    const auto depth = depth_encoder_forward(DepthMap(random_plane(rng, size, size)), c, p);
    ASSERT_EQ(color.size(), static_cast<std::size_t>(levels));
    ASSERT_EQ(depth.size(), static_cast<std::size_t>(levels + 1));
    for (int n = 1; n <= levels; ++n) EXPECT_EQ(color[static_cast<std::size_t>(n - 1)].height(), size >> n);
    for (int n = 0; n <= levels; ++n) EXPECT_EQ(depth[static_cast<std::size_t>(n)].height(), size >> n);
    for (const FusionStep& st : FusionSchedule::build(c, size, size).steps) {
      EXPECT_EQ(color[static_cast<std::size_t>(st.color_index - 1)].height(), st.height);
      EXPECT_EQ(depth[static_cast<std::size_t>(st.depth_index - 1)].height(), st.height);
    }
  }
}

TEST(FusionSchedule, RejectsIndivisibleSizes) {
  EXPECT_THROW(FusionSchedule::build(NetworkConfig::toy(), 72, 64), ValidationError);
}

TEST(Forward, OutputMatchesColorDimsForEveryScale) {
  std::mt19937_64 rng(4);
  const NetworkConfig c = NetworkConfig::toy();
  const Parameters p = init_parameters(c);
  for (int s : {2, 4, 8, 16})
    for (int size : {64, 128}) {
      const DepthMap lr(random_plane(rng, size / s, size / s));
      const ColorImage color = random_color(rng, size, size);
      const DepthMap out = forward(lr, color, c, p);
      EXPECT_EQ(out.height(), size);
      EXPECT_EQ(out.width(), size);
      for (double v : out.values.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
}

TEST(Forward, ZeroParametersReproduceBicubic) {
  std::mt19937_64 rng(5);
  const NetworkConfig c = NetworkConfig::toy();
  const Parameters zero = init_parameters(c).zeros_like();
  for (int s : {2, 4, 8, 16})
    for (int size : {64, 128}) {
      SrSample sample = random_sample(rng, size, s);
      const DepthMap net = forward(sample.lr_depth, sample.hr_color, c, zero);
      EXPECT_EQ(net.values, bicubic_sr(sample).values) << s << " " << size;
      EXPECT_EQ(forward(sample.lr_depth, sample.hr_color, c, zero, Precision::Single).values, net.values);
    }
}

TEST(Forward, RejectsBadGeometry) {
  std::mt19937_64 rng(6);
  const NetworkConfig c = NetworkConfig::toy();
  const Parameters p = init_parameters(c);
  EXPECT_THROW(forward(DepthMap(Plane(16, 16)), random_color(rng, 48, 48), c, p), ValidationError);  // scale 3
  EXPECT_THROW(forward(DepthMap(Plane(10, 10)), random_color(rng, 40, 40), c, p), ValidationError);  // 40 % 16
  EXPECT_THROW(forward(DepthMap(Plane(16, 8)), random_color(rng, 64, 64), c, p), ValidationError);   // anisotropic
  Parameters wrong = p;
  wrong.tensors().pop_back();
  EXPECT_THROW(forward(DepthMap(Plane(16, 16)), random_color(rng, 64, 64), c, wrong), ValidationError);
}

TEST(Forward, DeterministicAndThreadSafe) {
  std::mt19937_64 rng(7);
  const NetworkConfig c = NetworkConfig::toy();
  const Parameters p = init_parameters(c);
  const SrSample s = random_sample(rng, 64, 4);
  const DepthMap ref = forward(s.lr_depth, s.hr_color, c, p);
  std::vector<DepthMap> outs(4);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < outs.size(); ++i)
    pool.emplace_back([&, i] { outs[i] = forward(s.lr_depth, s.hr_color, c, p); });
  for (auto& t : pool) t.join();
  for (const auto& o : outs) EXPECT_EQ(o.values, ref.values);
}

TEST(Forward, TransposedModeAndNonResidualRun) {
  std::mt19937_64 rng(8);
  NetworkConfig c = NetworkConfig::toy();
  c.upsample_mode = UpsampleMode::TransposedConv;
  c.residual = false;
  const Parameters p = init_parameters(c);
  const SrSample s = random_sample(rng, 32, 2);
  const ForwardTrace tr = forward_trace(s.lr_depth, s.hr_color, c, p);
  EXPECT_EQ(tr.pre_clip, tr.network_out);
  EXPECT_EQ(tr.prediction.height(), 32);
}

TEST(Forward, SinglePrecisionCloseToDouble) {
  std::mt19937_64 rng(9);
  const NetworkConfig c = NetworkConfig::toy();
  const Parameters p = init_parameters(c);
  const SrSample s = random_sample(rng, 64, 4);
  const DepthMap d = forward(s.lr_depth, s.hr_color, c, p, Precision::Double);
  const DepthMap f = forward(s.lr_depth, s.hr_color, c, p, Precision::Single);
  for (std::size_t i = 0; i < d.values.size(); ++i) EXPECT_NEAR(f.values.values()[i], d.values.values()[i], 1e-5);
  const LossGradients gd = loss_gradients(s, c, p, LossWeights{}, Precision::Double);
  const LossGradients gf = loss_gradients(s, c, p, LossWeights{}, Precision::Single);
  EXPECT_NEAR(gf.loss.total, gd.loss.total, 1e-4);
}

TEST(FusionStep, InputGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(10);
  const NetworkConfig c = NetworkConfig::toy();
  const Parameters p = init_parameters(c);
  const FusionSchedule sched = FusionSchedule::build(c, 64, 64);
  const FusionStep st = sched.steps[0];
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto rand_map = [&](int ch, int h) {
    FeatureMap f(ch, h, h);
    for (double& v : f.values()) v = u(rng);
    return f;
  };
  FeatureMap prev = rand_map(c.decoder_channels[0], st.height);
  FeatureMap col = rand_map(c.transition_channels, st.height);
  FeatureMap dep = rand_map(c.depth_channels, st.height);
  const FeatureMap out = fusion_step(prev, col, dep, c, p, st.i);
  EXPECT_EQ(out.height(), 2 * st.height);
  FeatureMap wts = rand_map(out.channels(), out.height());
  const FusionStepGradients g = fusion_step_input_gradients(prev, col, dep, c, p, st.i, wts);
  EXPECT_EQ(g.value, out);
  auto objective = [&] {
    const FeatureMap o = fusion_step(prev, col, dep, c, p, st.i);
    double s = 0;
    for (std::size_t i = 0; i < o.size(); ++i) s += o.values()[i] * wts.values()[i];
    return s;
  };
  const double h = 1e-6;
  auto check = [&](FeatureMap& x, const FeatureMap& grad) {
    for (std::size_t i = 0; i < x.size(); i += 11) {
      const double orig = x.values()[i];
      x.values()[i] = orig + h;
      const double up = objective();
      x.values()[i] = orig - h;
      const double dn = objective();
      x.values()[i] = orig;
      EXPECT_NEAR(grad.values()[i], (up - dn) / (2 * h), 1e-5);
    }
  };
  check(prev, g.grad_prev);
  check(col, g.grad_color);
  check(dep, g.grad_depth);
  EXPECT_THROW(fusion_step(prev, rand_map(c.transition_channels, st.height / 2), dep, c, p, st.i), ValidationError);
}

TEST(LossGradients, LossMatchesForwardAndGradLayoutMatchesParams) {
  std::mt19937_64 rng(11);
  const NetworkConfig c = NetworkConfig::toy();
  const Parameters p = init_parameters(c);
  const SrSample s = random_sample(rng, 32, 2);
  const LossGradients g = loss_gradients(s, c, p, LossWeights{});
  EXPECT_DOUBLE_EQ(g.loss.total, loss_value(s, c, p, LossWeights{}));
  ASSERT_EQ(g.grads.tensors().size(), p.tensors().size());
  for (std::size_t i = 0; i < p.tensors().size(); ++i) {
    EXPECT_EQ(g.grads.tensors()[i].name, p.tensors()[i].name);
    EXPECT_EQ(g.grads.tensors()[i].shape, p.tensors()[i].shape);
  }
  EXPECT_EQ(branch_signature(s, c, p, LossWeights{}), branch_signature(s, c, p, LossWeights{}));
}
