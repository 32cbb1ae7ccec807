#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "depthsr/checkpoint.hpp"
#include "depthsr/error.hpp"
#include "test_util.hpp"

using namespace depthsr;
using depthsr::testing::random_sample;
using depthsr::testing::TempDir;

namespace {

Parameters jittered(const NetworkConfig& c) {
  Parameters p = init_parameters(c);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1e-3);
  for (auto& t : p.tensors())
    for (double& v : t.values) v += n(rng);
  return p;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  TempDir dir("ckpt");
  NetworkConfig c = NetworkConfig::toy();
  c.seed = 7;
  c.upsample_mode = UpsampleMode::TransposedConv;
  const Parameters p = jittered(c);
  save_checkpoint(p, c, dir.file("m.ckpt"));
  const Checkpoint back = load_checkpoint(dir.file("m.ckpt"));
  EXPECT_EQ(back.config, c);
  EXPECT_EQ(back.params, p);
  EXPECT_EQ(back.params.digest(), p.digest());
  EXPECT_FALSE(std::filesystem::exists(dir.file("m.ckpt.partial")));

  std::mt19937_64 rng(1);
  const SrSample s = random_sample(rng, 64, 4);
  EXPECT_EQ(forward(s.lr_depth, s.hr_color, c, p).values, forward(s.lr_depth, s.hr_color, back.config, back.params).values);
}

TEST(Checkpoint, SpecialValuesSurvive) {
  const NetworkConfig c = NetworkConfig::toy();
  Parameters p = init_parameters(c);
  p.tensors()[0].values[0] = -0.0;
  p.tensors()[0].values[1] = 5e-324;
  p.tensors()[0].values[2] = 1.0 / 3.0;
  const Checkpoint back = decode_checkpoint(encode_checkpoint(p, c));
  EXPECT_TRUE(std::signbit(back.params.tensors()[0].values[0]));
  EXPECT_EQ(back.params.tensors()[0].values[1], 5e-324);
  EXPECT_EQ(back.params.tensors()[0].values[2], 1.0 / 3.0);
}

TEST(Checkpoint, TruncationIsReportedAsCorrupt) {
  const NetworkConfig c = NetworkConfig::toy();
  const std::string bytes = encode_checkpoint(init_parameters(c), c);
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1})
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, cut)), CorruptCheckpointError) << cut;
  EXPECT_THROW(decode_checkpoint(bytes + "x"), CorruptCheckpointError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), CorruptCheckpointError);
}

TEST(Checkpoint, PayloadLengthMismatchNamesArray) {
  const NetworkConfig c = NetworkConfig::toy();
  const Parameters p = init_parameters(c);
  std::string bytes = encode_checkpoint(p, c);
  // The first record's payload length follows its dims; locate it by value.
  const std::string& name = p.tensors()[0].name;
  const auto at = bytes.find(name);
  ASSERT_NE(at, std::string::npos);
  const std::size_t len_pos = at + name.size() + 1 + 4 + 4 * 8;
  ASSERT_EQ(static_cast<unsigned char>(bytes[len_pos]), (p.tensors()[0].size() * 8) & 0xff);
  bytes[len_pos] = static_cast<char>(bytes[len_pos] + 8);
  try {
    decode_checkpoint(bytes);
    FAIL();
  } catch (const CorruptCheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, ShapeMismatchAgainstConfigRejected) {
  const NetworkConfig c = NetworkConfig::toy();
  NetworkConfig other = c;
  other.base_channels = 6;
  // Arrays from one config labelled with another config's text.
  std::string bytes = encode_checkpoint(init_parameters(other), other);
  const std::string a = other.serialize(), b = c.serialize();
  ASSERT_EQ(a.size(), b.size());
  bytes.replace(bytes.find(a), a.size(), b);
  EXPECT_THROW(decode_checkpoint(bytes), ValidationError);
}

TEST(Checkpoint, MissingFileRejected) {
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.ckpt"), ValidationError);
}
