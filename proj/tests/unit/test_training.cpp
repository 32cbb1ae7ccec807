#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "depthsr/checkpoint.hpp"
#include "depthsr/error.hpp"
#include "depthsr/training.hpp"
#include "test_util.hpp"

using namespace depthsr;
using depthsr::testing::random_sample;
using depthsr::testing::TempDir;

namespace {

std::vector<SrSample> small_set(int n, int scale = 2) {
  std::mt19937_64 rng(17);
  std::vector<SrSample> v;
  for (int i = 0; i < n; ++i) {
    v.push_back(random_sample(rng, 32, scale));
    v.back().source_id = "s" + std::to_string(i);
  }
  return v;
}

TrainConfig quick(int steps) {
  TrainConfig c;
  c.learning_rate = 1e-3;
  c.batch_size = 2;
  c.epochs = 100;
  c.max_steps = steps;
  c.scale = 2;
  return c;
}

}  // namespace

TEST(Adam, SingleStepMatchesClosedForm) {
  Parameters p({{"w", {2}, {1.0, -2.0}}});
  const Parameters g({{"w", {2}, {0.5, -3.0}}});
  Adam opt(p, 0.01);
  opt.step(p, g);
  // First bias-corrected step is lr * g / (|g| + eps').
  for (int i = 0; i < 2; ++i) {
    const double gi = g.tensors()[0].values[static_cast<std::size_t>(i)];
    const double want = (i == 0 ? 1.0 : -2.0) - 0.01 * gi / (std::abs(gi) + 1e-8);
    EXPECT_NEAR(p.tensors()[0].values[static_cast<std::size_t>(i)], want, 1e-15);
  }
  // Second step with a different gradient, reference computed by hand.
  const Parameters g2({{"w", {2}, {-1.0, 1.0}}});
  const double m = 0.9 * 0.05 + 0.1 * -1.0;
  const double v = 0.999 * (0.001 * 0.25) + 0.001 * 1.0;
  const double step = 0.01 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  const double before = p.tensors()[0].values[0];
  opt.step(p, g2);
  EXPECT_NEAR(p.tensors()[0].values[0], before - step, 1e-15);
  EXPECT_EQ(opt.steps(), 2);
}

TEST(Train, ZeroLearningRateLeavesParametersUntouched) {
  TrainConfig c = quick(3);
  c.learning_rate = 0.0;
  const NetworkConfig net = NetworkConfig::toy();
  const TrainResult r = train(c, small_set(4), net);
  EXPECT_EQ(r.params, init_parameters(net));
  EXPECT_EQ(r.log.records.size(), 3u);
}

TEST(Train, SameSeedReproducesLog) {
  const auto data = small_set(5);
  const TrainResult a = train(quick(6), data, NetworkConfig::toy());
  const TrainResult b = train(quick(6), data, NetworkConfig::toy());
  EXPECT_TRUE(a.log.same_losses(b.log));
  EXPECT_EQ(a.params, b.params);
  TrainConfig other = quick(6);
  other.seed = 1;
  EXPECT_FALSE(train(other, data, NetworkConfig::toy()).log.same_losses(a.log));
}

TEST(Train, ThreadedBatchesMatchSerial) {
  const auto data = small_set(4);
  TrainConfig c = quick(3);
  c.batch_size = 4;
  const TrainResult serial = train(c, data, NetworkConfig::toy());
  c.threads = 3;
  const TrainResult threaded = train(c, data, NetworkConfig::toy());
  EXPECT_TRUE(serial.log.same_losses(threaded.log));
  EXPECT_EQ(serial.params, threaded.params);
}

TEST(Train, StepsAndEpochsAreConsistent) {
  TrainConfig c = quick(0);
  c.epochs = 2;
  c.batch_size = 2;
  const TrainResult r = train(c, small_set(5), NetworkConfig::toy());
  // 5 samples in batches of 2 -> 3 steps per epoch.
  ASSERT_EQ(r.log.records.size(), 6u);
  for (std::size_t i = 0; i < r.log.records.size(); ++i) {
    EXPECT_EQ(r.log.records[i].step, static_cast<int>(i) + 1);
    EXPECT_EQ(r.log.records[i].epoch, static_cast<int>(i) / 3 + 1);
    EXPECT_TRUE(std::isfinite(r.log.records[i].total));
  }
  EXPECT_EQ(r.log.final_digest, r.params.digest());
}

TEST(Train, LearningReducesLoss) {
  const auto data = small_set(2);
  TrainConfig c = quick(60);
  c.learning_rate = 3e-3;
  const TrainResult r = train(c, data, NetworkConfig::toy());
  EXPECT_LT(r.log.records.back().total, r.log.records.front().total);
}

TEST(Train, NonFiniteLossAbortsWithStep) {
  const NetworkConfig net = NetworkConfig::toy();
  Parameters bad = init_parameters(net);
  bad.tensors().back().values[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train(quick(5), small_set(2), net, bad);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
  }
}

TEST(Train, RejectsBadInputs) {
  const NetworkConfig net = NetworkConfig::toy();
  EXPECT_THROW(train(quick(1), {}, net), ValidationError);
  EXPECT_THROW(train(quick(1), small_set(2, 4), net), ValidationError);  // scale mismatch
  TrainConfig c = quick(1);
  c.batch_size = 0;
  EXPECT_THROW(train(c, small_set(2), net), ValidationError);
  c = quick(1);
  c.learning_rate = -1;
  EXPECT_THROW(train(c, small_set(2), net), ValidationError);
  c = quick(1);
  c.epochs = 0;
  EXPECT_THROW(train(c, small_set(2), net), ValidationError);
}

TEST(Train, PeriodicCheckpointsAndCsvLog) {
  TempDir dir("train");
  TrainConfig c = quick(4);
  c.checkpoint_every = 2;
  c.checkpoint_path = dir.file("m.ckpt");
  const NetworkConfig net = NetworkConfig::toy();
  const TrainResult r = train(c, small_set(4), net);
  EXPECT_EQ(load_checkpoint(c.checkpoint_path).params, r.params);
  r.log.write_csv(dir.file("log.csv"));
  std::ifstream in(dir.file("log.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_NE(line.find("beta1=0.9"), std::string::npos);
  EXPECT_NE(line.find("beta2=0.999"), std::string::npos);
  EXPECT_NE(line.find("epsilon=1e-08"), std::string::npos);
  std::getline(in, line);
  EXPECT_EQ(line, "# final_digest=" + r.log.final_digest);
  std::getline(in, line);
  EXPECT_EQ(line, "step,epoch,total,l1,edge,structure,seconds");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Train, SinglePrecisionRuns) {
  TrainConfig c = quick(3);
  c.precision = Precision::Single;
  const TrainResult r = train(c, small_set(2), NetworkConfig::toy());
  EXPECT_TRUE(r.params.all_finite());
  const TrainResult d = train(quick(3), small_set(2), NetworkConfig::toy());
  EXPECT_NEAR(r.log.records[0].total, d.log.records[0].total, 1e-4);
}
