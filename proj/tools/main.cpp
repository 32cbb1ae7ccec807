#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "commands.hpp"
#include "depthsr/error.hpp"

namespace {

template <typename T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace depthsr::cli;
  CLI::App app{"Color-guided depth map super-resolution"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic piecewise-planar RGB-D pairs");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--count", synth.count, "Number of pairs")->required();
  std::vector<int> size;
  s->add_option("--size", size, "Height and width")->expected(2)->required();
  s->add_option("--seed", synth.seed, "Seed of the first scene");

  PrepareArgs prep;
  auto* p = app.add_subcommand("prepare", "Cut training patches out of a dataset");
  p->add_option("--in", prep.in, "Dataset directory or manifest")->required();
  p->add_option("--out", prep.out, "Output directory")->required();
  p->add_option("--config", prep.config, "Run config file");
  optional_flag(p, "--patch", prep.patch, "Patch size (default 128)");
  optional_flag(p, "--stride", prep.stride, "Patch stride (default 32)");
  p->add_flag("--rot90", prep.rot90, "Also emit a 90-degree rotated copy of every patch");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the fusion network");
  t->add_option("--config", tr.config, "Run config file");
  t->add_option("--data", tr.data, "Training dataset directory or manifest")->required();
  optional_flag(t, "--scale", tr.scale, "Upscaling factor (2, 4, 8, 16)");
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  t->add_option("--log", tr.log, "Training log CSV (default <out>.log.csv)");
  t->add_option("--init", tr.init, "Start from this checkpoint");
  optional_flag(t, "--steps", tr.max_steps, "Stop after this many optimizer steps");
  optional_flag(t, "--epochs", tr.epochs, "Epochs");
  optional_flag(t, "--batch-size", tr.batch_size, "Mini-batch size");
  optional_flag(t, "--lr", tr.learning_rate, "Learning rate");
  optional_flag(t, "--seed", tr.seed, "Shuffle seed");
  optional_flag(t, "--threads", tr.threads, "Gradient worker threads");
  optional_flag(t, "--precision", tr.precision, "double or single");
  t->add_option("--progress-every", tr.progress_every, "Progress line interval in steps");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a method on a dataset");
  e->add_option("--ckpt", ev.ckpt, "Checkpoint (method mpfn)");
  e->add_option("--config", ev.config, "Run config file");
  e->add_option("--data", ev.data, "Evaluation dataset directory or manifest")->required();
  optional_flag(e, "--scale", ev.scale, "Upscaling factor (2, 4, 8, 16)");
  optional_flag(e, "--method", ev.method, "mpfn, bicubic or gf");
  e->add_option("--report", ev.report, "Per-image CSV report")->required();
  e->add_option("--dump-images", ev.dump_images, "Directory for predicted depth and error heat-map PNGs");

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "Super-resolve one depth map");
  i->add_option("--ckpt", inf.ckpt, "Checkpoint")->required();
  i->add_option("--color", inf.color, "High-resolution color PNG")->required();
  i->add_option("--depth", inf.depth, "Low-resolution 16-bit depth PNG")->required();
  i->add_option("--scale", inf.scale, "Upscaling factor (2, 4, 8, 16)")->required();
  i->add_option("--out", inf.out, "Output 16-bit depth PNG")->required();

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  g->add_option("--levels", gc.levels, "Encoder levels of the toy network");
  g->add_option("--seed", gc.seed, "Seed for the sample and parameters");
  g->add_option("--eps", gc.eps, "Finite-difference step");
  g->add_flag("--l1-only", gc.l1_only, "Check the L1 term alone against the tight gate");
  g->add_flag("--inject-fault", gc.inject_fault, "Perturb the analytic gradient (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*s) {
      synth.height = size[0];
      synth.width = size[1];
      return cmd_synth(synth);
    }
    if (*p) return cmd_prepare(prep);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*i) return cmd_infer(inf);
    if (*g) return cmd_gradcheck(gc);
  } catch (const depthsr::NumericalError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  } catch (const depthsr::Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 1;
}
