#include <gtest/gtest.h>

#include <cmath>

#include "depthsr/gradcheck.hpp"
#include "depthsr/imaging.hpp"

using namespace depthsr;

TEST(Gradcheck, SampleKeepsPredictionAwayFromKinks) {
  const NetworkConfig c = NetworkConfig::toy();
  const SrSample s = gradcheck_sample(c, 3);
  const ForwardTrace tr = forward_trace(s.lr_depth, s.hr_color, c, init_parameters(c));
  for (std::size_t i = 0; i < tr.pre_clip.size(); ++i) {
    EXPECT_GT(tr.pre_clip.values()[i], 0.0);
    EXPECT_LT(tr.pre_clip.values()[i], 1.0);
    EXPECT_GT(std::abs(tr.prediction.values()[i] - s.hr_depth_gt.values.values()[i]), 10 * 1e-4);
  }
}

TEST(Gradcheck, ToyConfigPassesEveryGroup) {
  const NetworkConfig c = NetworkConfig::toy();
  const GradcheckResult r = grad_check(c, LossWeights{}, {});
  EXPECT_TRUE(r.passed(kGradcheckGate)) << r.max_rel_error << " at " << r.worst_entry;
  EXPECT_EQ(r.total_params, 4819u);
  // Every weight tensor contributes scored entries.
  const Parameters params = init_parameters(c);
  for (const auto& t : params.tensors())
    if (t.name.ends_with(".weight")) {
      EXPECT_GT(r.groups.count(t.name), 0u) << t.name;
    }
  EXPECT_LT(r.excluded, r.checked / 100);
}

TEST(Gradcheck, L1OnlyMeetsTightGate) {
  const GradcheckResult r = grad_check(NetworkConfig::toy(), LossWeights{1, 0, 0}, {});
  EXPECT_EQ(gradcheck_gate(LossWeights{1, 0, 0}), kGradcheckL1Gate);
  EXPECT_TRUE(r.passed(kGradcheckL1Gate)) << r.max_rel_error << " at " << r.worst_entry;
}

TEST(Gradcheck, InjectedFaultFailsGate) {
  GradcheckOptions o;
  o.inject_fault = true;
  const GradcheckResult r = grad_check(NetworkConfig::toy(), LossWeights{}, o);
  EXPECT_FALSE(r.passed(kGradcheckGate));
  EXPECT_GT(r.max_rel_error, 5e-3);
}

TEST(Gradcheck, LargerConfigIsSubsampled) {
  NetworkConfig c = NetworkConfig::toy();
  c.base_channels = 16;
  c.dense_growth = 8;
  GradcheckOptions o;
  o.seed = 4;
  const GradcheckResult r = grad_check(c, LossWeights{}, o);
  EXPECT_GT(r.total_params, 5000u);
  EXPECT_EQ(r.checked + r.below_floor + r.excluded, 500u);
  EXPECT_TRUE(r.passed(kGradcheckGate)) << r.max_rel_error;
}

TEST(Gradcheck, ZeroParametersL1GradientAgreesAtOrigin) {
  // All-zero residual network: output is the clipped bicubic upscale.
  const NetworkConfig c = NetworkConfig::toy();
  const SrSample s = gradcheck_sample(c, 9);
  Parameters p = init_parameters(c).zeros_like();
  const LossWeights w{1, 0, 0};
  const LossGradients g = loss_gradients(s, c, p, w);
  const double h = 1e-4;
  for (const char* name : {"fusion.last.out.bias", "fusion.last.out.weight"}) {
    auto& t = p.at(name);
    for (std::size_t i = 0; i < std::min<std::size_t>(t.size(), 4); ++i) {
      const double orig = t.values[i];
      t.values[i] = orig + h;
      const double up = loss_value(s, c, p, w);
      t.values[i] = orig - h;
      const double dn = loss_value(s, c, p, w);
      t.values[i] = orig;
      EXPECT_NEAR(g.grads.at(name).values[i], (up - dn) / (2 * h), 1e-9) << name << "[" << i << "]";
    }
  }
  // Only the output bias sees a nonzero signal when every activation is zero.
  EXPECT_NE(g.grads.at("fusion.last.out.bias").values[0], 0.0);
  EXPECT_EQ(g.grads.at("color.stem.weight").values[0], 0.0);
}
