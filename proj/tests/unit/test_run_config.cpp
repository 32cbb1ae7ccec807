#include <gtest/gtest.h>

#include "depthsr/error.hpp"
#include "run_config.hpp"

using namespace depthsr;
using namespace depthsr::cli;

TEST(RunConfig, DefaultsWhenEmpty) {
  const RunConfig c = parse_run_config_text("");
  EXPECT_EQ(c.network, NetworkConfig::toy());
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 1e-4);
  EXPECT_EQ(c.patch, 128);
  EXPECT_EQ(c.stride, 32);
  EXPECT_EQ(c.method, "mpfn");
}

TEST(RunConfig, ParsesEverySection) {
  const RunConfig c = parse_run_config_text(R"(
[data]
scale = 8
patch = 64
stride = 16
rot90 = true

[network]
levels = 4
decoder_channels = 5
upsample_mode = transposed

[train]
learning_rate = 0.001
batch_size = 4
epochs = 2
max_steps = 10
seed = 3
precision = single
threads = 2

[loss]
lambda1 = 1
lambda2 = 0
lambda3 = 0.5

[eval]
method = gf
gf_radius = 4
gf_eps = 0.01
)");
  EXPECT_EQ(c.train.scale, 8);
  EXPECT_EQ(c.patch, 64);
  EXPECT_TRUE(c.rot90);
  EXPECT_EQ(c.network.levels, 4);
  EXPECT_EQ(c.network.decoder_channels, std::vector<int>(5, 5));
  EXPECT_EQ(c.network.upsample_mode, UpsampleMode::TransposedConv);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 1e-3);
  EXPECT_EQ(c.train.precision, Precision::Single);
  EXPECT_DOUBLE_EQ(c.train.loss_weights.lambda2, 0.0);
  EXPECT_EQ(c.method, "gf");
  EXPECT_EQ(c.gf_radius, 4);
}

TEST(RunConfig, UnknownKeyIsNamed) {
  for (const char* text : {"[train]\nlearning_rte = 1\n", "[network]\nwidth = 3\n", "[optim]\nlr = 1\n", "lr = 1\n"}) {
    try {
      parse_run_config_text(text);
      FAIL() << text;
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      EXPECT_TRUE(msg.find("learning_rte") != std::string::npos || msg.find("width") != std::string::npos ||
                  msg.find("optim") != std::string::npos || msg.find("'lr'") != std::string::npos)
          << msg;
    }
  }
}

TEST(RunConfig, ValueErrorsRejected) {
  EXPECT_THROW(parse_run_config_text("[train]\nbatch_size = two\n"), ValidationError);
  EXPECT_THROW(parse_run_config_text("[data]\nscale = 3\n"), ValidationError);
  EXPECT_THROW(parse_run_config_text("[eval]\nmethod = nearest\n"), ValidationError);
  EXPECT_THROW(parse_run_config_text("[loss]\nlambda1 = -1\n"), ValidationError);
  EXPECT_THROW(parse_run_config_text("[train\n"), ValidationError);
}

TEST(RunConfig, SchemaListsAllSections) {
  const auto keys = config_schema();
  for (const char* k : {"data.scale", "network.levels", "train.learning_rate", "loss.lambda3", "eval.method"})
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
}
