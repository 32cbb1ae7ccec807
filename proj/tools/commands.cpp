#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "depthsr/baselines.hpp"
#include "depthsr/checkpoint.hpp"
#include "depthsr/data.hpp"
#include "depthsr/error.hpp"
#include "depthsr/gradcheck.hpp"
#include "depthsr/hash.hpp"
#include "depthsr/metrics.hpp"
#include "depthsr/synth.hpp"
#include "depthsr/training.hpp"
#include "run_config.hpp"

namespace depthsr::cli {

namespace fs = std::filesystem;

namespace {

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

// Output directory must either not exist yet or be a directory.
void check_output_dir(const std::string& dir) {
  DEPTHSR_REQUIRE(!dir.empty(), "output directory not given");
  DEPTHSR_REQUIRE(!fs::exists(dir) || fs::is_directory(dir), "output path '" + dir + "' exists and is not a directory");
}

void check_output_file(const std::string& path) {
  DEPTHSR_REQUIRE(!path.empty(), "output path not given");
  const fs::path parent = fs::absolute(path).parent_path();
  DEPTHSR_REQUIRE(fs::is_directory(parent), "output directory '" + parent.string() + "' does not exist");
  DEPTHSR_REQUIRE(!fs::is_directory(path), "output path '" + path + "' is a directory");
}

std::vector<SrSample> load_samples(const std::string& location, int scale, double unit_scale) {
  std::vector<RgbdPair> pairs = load_dataset(location, unit_scale);
  DEPTHSR_REQUIRE(!pairs.empty(), "no RGB-D pairs found in " + location);
  std::vector<SrSample> out;
  out.reserve(pairs.size());
  for (RgbdPair& p : pairs) {
    if (!p.depth.fully_valid()) p.depth = complete_depth(p.depth);
    DEPTHSR_REQUIRE(p.color.height() % scale == 0 && p.color.width() % scale == 0,
                    "pair '" + p.source_id + "' size is not divisible by the scale " + std::to_string(scale));
    out.push_back(make_sr_sample(p, scale));
  }
  return out;
}

void check_network_inputs(const std::vector<SrSample>& samples, const NetworkConfig& net) {
  const int mult = net.size_multiple();
  for (const auto& s : samples)
    DEPTHSR_REQUIRE(s.hr_color.height() % mult == 0 && s.hr_color.width() % mult == 0,
                    "sample '" + s.source_id + "' size must be divisible by " + std::to_string(mult) +
                        " for a network with " + std::to_string(net.levels) + " levels");
}

}  // namespace

int cmd_synth(const SynthArgs& a) {
  DEPTHSR_REQUIRE(a.count >= 1, "--count must be >= 1");
  DEPTHSR_REQUIRE(a.height >= 64 && a.width >= 64, "--size must be at least 64 64");
  check_output_dir(a.out);
  std::vector<RgbdPair> pairs;
  pairs.reserve(static_cast<std::size_t>(a.count));
  for (int i = 0; i < a.count; ++i) pairs.push_back(synth_scene(a.seed + static_cast<std::uint64_t>(i), a.height, a.width));
  write_dataset(a.out, pairs);
  std::printf("wrote %d synthetic pairs to %s\n", a.count, a.out.c_str());
  return 0;
}

int cmd_prepare(const PrepareArgs& a) {
  RunConfig rc = config_or_default(a.config);
  if (a.patch) rc.patch = *a.patch;
  if (a.stride) rc.stride = *a.stride;
  if (a.rot90) rc.rot90 = true;
  rc.validate();
  check_output_dir(a.out);
  const std::vector<RgbdPair> pairs = load_dataset(a.in, rc.unit_scale);
  DEPTHSR_REQUIRE(!pairs.empty(), "no RGB-D pairs found in " + a.in);
  std::size_t expected = 0;
  for (const auto& p : pairs) expected += patch_count(p.color.height(), p.color.width(), rc.patch, rc.stride);
  DEPTHSR_REQUIRE(expected > 0, "patch size " + std::to_string(rc.patch) + " exceeds every input image");

  std::vector<RgbdPair> out;
  for (const auto& p : pairs) {
    RgbdPair filled = p;
    if (!filled.depth.fully_valid()) filled.depth = complete_depth(filled.depth);
    PatchSet ps = extract_patches(filled, rc.patch, rc.stride);
    for (auto& patch : ps.patches) {
      if (rc.rot90) {
        for (auto& v : augment_rot90(patch)) out.push_back(std::move(v));
      } else {
        out.push_back(std::move(patch));
      }
    }
  }
  write_dataset(a.out, out);
  std::printf("wrote %zu patches (%zu windows%s) to %s\n", out.size(), expected, rc.rot90 ? ", with 90-degree copies" : "",
              a.out.c_str());
  return 0;
}

int cmd_train(const TrainArgs& a) {
  RunConfig rc = config_or_default(a.config);
  if (a.scale) rc.train.scale = *a.scale;
  if (a.max_steps) rc.train.max_steps = *a.max_steps;
  if (a.epochs) rc.train.epochs = *a.epochs;
  if (a.batch_size) rc.train.batch_size = *a.batch_size;
  if (a.learning_rate) rc.train.learning_rate = *a.learning_rate;
  if (a.seed) rc.train.seed = *a.seed;
  if (a.threads) rc.train.threads = *a.threads;
  if (a.precision) rc.train.precision = parse_precision(*a.precision);
  if (rc.train.checkpoint_every > 0) rc.train.checkpoint_path = a.out;
  rc.validate();
  check_output_file(a.out);
  const std::string log_path = a.log.empty() ? a.out + ".log.csv" : a.log;
  check_output_file(log_path);

  std::optional<Parameters> init;
  if (!a.init.empty()) {
    Checkpoint ck = load_checkpoint(a.init);
    DEPTHSR_REQUIRE(ck.config == rc.network, "initial checkpoint config does not match the network config");
    init = std::move(ck.params);
  }
  const std::vector<SrSample> samples = load_samples(a.data, rc.train.scale, rc.unit_scale);
  check_network_inputs(samples, rc.network);

  const std::size_t n_params = init ? init->count() : init_parameters(rc.network).count();
  std::fprintf(stderr, "training on %zu samples, %zu parameters\n", samples.size(), n_params);
  const TrainResult res = train(rc.train, samples, rc.network, init, stderr_progress(a.progress_every));
  save_checkpoint(res.params, rc.network, a.out);
  res.log.write_csv(log_path);
  std::printf("steps %zu  final loss %.6f  digest %s\n", res.log.records.size(),
              res.log.records.empty() ? 0.0 : res.log.records.back().total, res.log.final_digest.c_str());
  std::printf("checkpoint %s\nlog %s\n", a.out.c_str(), log_path.c_str());
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  RunConfig rc = config_or_default(a.config);
  if (a.scale) rc.train.scale = *a.scale;
  if (a.method) rc.method = *a.method;
  rc.validate();
  check_output_file(a.report);
  if (!a.dump_images.empty()) check_output_dir(a.dump_images);

  std::optional<Checkpoint> ck;
  if (rc.method == "mpfn") {
    DEPTHSR_REQUIRE(!a.ckpt.empty(), "--ckpt is required for method mpfn");
    ck = load_checkpoint(a.ckpt);
    const bool network_in_file =
        std::any_of(rc.keys_from_file.begin(), rc.keys_from_file.end(), [](const std::string& k) { return k.rfind("network.", 0) == 0; });
    DEPTHSR_REQUIRE(!network_in_file || ck->config == rc.network,
                    "checkpoint network config does not match the [network] section of " + a.config);
  }
  const std::vector<SrSample> samples = load_samples(a.data, rc.train.scale, rc.unit_scale);
  if (ck) check_network_inputs(samples, ck->config);

  EvalOptions opts;
  opts.method_name = rc.method;
  opts.report_scale = rc.report_scale;
  Fnv1a h;
  h.mix(rc.method);
  SrMethod method;
  if (rc.method == "mpfn") {
    h.mix(ck->config.serialize());
    h.mix(ck->params.digest());
    method = [&](const SrSample& s) { return forward(s.lr_depth, s.hr_color, ck->config, ck->params); };
  } else if (rc.method == "bicubic") {
    method = bicubic_sr;
  } else {
    h.mix(static_cast<double>(rc.gf_radius));
    h.mix(rc.gf_eps);
    method = [&](const SrSample& s) { return guided_filter_sr(s, rc.gf_radius, rc.gf_eps); };
  }
  h.mix(static_cast<double>(rc.train.scale));
  opts.config_digest = h.hex();
  if (!a.dump_images.empty()) {
    fs::create_directories(a.dump_images);
    opts.on_prediction = [&](const SrSample& s, const DepthMap& pred) {
      const fs::path dir(a.dump_images);
      save_depth_png((dir / (s.source_id + "_pred.png")).string(), pred);
      png::write_rgb8((dir / (s.source_id + "_error.png")).string(), error_heatmap(pred, s.hr_depth_gt));
    };
  }
  const EvalReport report = evaluate(method, samples, opts);
  write_report_csv(a.report, report);
  std::cout << format_summary(report);
  std::printf("report %s\n", a.report.c_str());
  return 0;
}

int cmd_infer(const InferArgs& a) {
  DEPTHSR_REQUIRE(is_supported_scale(a.scale), "--scale must be one of 2, 4, 8, 16");
  check_output_file(a.out);
  const Checkpoint ck = load_checkpoint(a.ckpt);
  const ColorImage color = load_color_png(a.color);
  DepthMap depth = load_depth_png(a.depth);
  DEPTHSR_REQUIRE(color.height() == depth.height() * a.scale && color.width() == depth.width() * a.scale,
                  "color is " + std::to_string(color.height()) + "x" + std::to_string(color.width()) +
                      " but depth x scale is " + std::to_string(depth.height() * a.scale) + "x" +
                      std::to_string(depth.width() * a.scale));
  const int mult = ck.config.size_multiple();
  DEPTHSR_REQUIRE(color.height() % mult == 0 && color.width() % mult == 0,
                  "color size must be divisible by " + std::to_string(mult) + " for this checkpoint");
  if (!depth.fully_valid()) depth = complete_depth(depth);
  const DepthMap pred = forward(depth, color, ck.config, ck.params);
  save_depth_png(a.out, pred);
  std::printf("wrote %dx%d depth to %s\n", pred.height(), pred.width(), a.out.c_str());
  return 0;
}

int cmd_gradcheck(const GradcheckArgs& a) {
  NetworkConfig cfg = NetworkConfig::toy();
  cfg.levels = a.levels;
  cfg.decoder_channels.assign(static_cast<std::size_t>(a.levels + 1), cfg.decoder_channels.front());
  cfg.validate();
  const LossWeights w = a.l1_only ? LossWeights{1.0, 0.0, 0.0} : LossWeights{};
  GradcheckOptions opts;
  opts.eps = a.eps;
  opts.seed = a.seed;
  opts.inject_fault = a.inject_fault;
  const GradcheckResult r = grad_check(cfg, w, opts);
  const double gate = gradcheck_gate(w);
  for (const auto& [name, g] : r.groups) std::printf("  %-40s %6zu entries  max rel %.3e\n", name.c_str(), g.checked, g.max_rel_error);
  std::printf("parameters %zu  checked %zu  below-floor %zu  excluded %zu\n", r.total_params, r.checked, r.below_floor,
              r.excluded);
  std::printf("max relative error %.3e (%s)  gate %.0e  %s\n", r.max_rel_error, r.worst_entry.c_str(), gate,
              r.passed(gate) ? "PASS" : "FAIL");
  if (!r.passed(gate)) throw NumericalError("gradient check failed");
  return 0;
}

}  // namespace depthsr::cli
