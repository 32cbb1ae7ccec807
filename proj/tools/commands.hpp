#pragma once

#include <optional>
#include <string>

namespace depthsr::cli {

struct SynthArgs {
  std::string out;
  int count = 0;
  int height = 0;
  int width = 0;
  std::uint64_t seed = 0;
};

struct PrepareArgs {
  std::string in;
  std::string out;
  std::string config;
  std::optional<int> patch;
  std::optional<int> stride;
  bool rot90 = false;
};

struct TrainArgs {
  std::string config;
  std::string data;
  std::optional<int> scale;
  std::string out;
  std::string log;  // default: <out>.log.csv
  std::optional<int> max_steps;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> precision;
  std::string init;  // optional starting checkpoint
  int progress_every = 10;
};

struct EvalArgs {
  std::string ckpt;
  std::string config;
  std::string data;
  std::optional<int> scale;
  std::optional<std::string> method;
  std::string report;
  std::string dump_images;
};

struct InferArgs {
  std::string ckpt;
  std::string color;
  std::string depth;
  int scale = 0;
  std::string out;
};

struct GradcheckArgs {
  int levels = 3;
  std::uint64_t seed = 0;
  double eps = 1e-4;
  bool l1_only = false;
  bool inject_fault = false;
};

int cmd_synth(const SynthArgs& a);
int cmd_prepare(const PrepareArgs& a);
int cmd_train(const TrainArgs& a);
int cmd_eval(const EvalArgs& a);
int cmd_infer(const InferArgs& a);
int cmd_gradcheck(const GradcheckArgs& a);

}  // namespace depthsr::cli
