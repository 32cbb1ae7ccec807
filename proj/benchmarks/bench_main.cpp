#include <benchmark/benchmark.h>

#include <random>

#include "depthsr/baselines.hpp"
#include "depthsr/imaging.hpp"
#include "depthsr/losses.hpp"
#include "depthsr/network.hpp"
#include "depthsr/synth.hpp"
#include "depthsr/data.hpp"

using namespace depthsr;

namespace {

Plane noise(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane p(h, w);
  for (double& v : p.values()) v = u(rng);
  return p;
}

void BM_Bicubic4x(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Plane src = noise(n / 4, n / 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(bicubic_resample(src, n, n));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Bicubic4x)->Arg(128)->Arg(512);

void BM_Sobel5(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Plane img = noise(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sobel_magnitude(img, 5));
}
BENCHMARK(BM_Sobel5)->Arg(128)->Arg(512);

void BM_SsimWithGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Plane a = noise(n, n, 3);
  const Plane b = noise(n, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(ssim_mean_with_gradient(a, b));
}
BENCHMARK(BM_SsimWithGradient)->Arg(64)->Arg(128);

void BM_GuidedFilterSr(benchmark::State& state) {
  const SrSample s = make_sr_sample(synth_scene(5, 128, 128), 4);
  for (auto _ : state) benchmark::DoNotOptimize(guided_filter_sr(s));
}
BENCHMARK(BM_GuidedFilterSr);

void BM_ToyForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const NetworkConfig cfg = NetworkConfig::toy();
  const Parameters p = init_parameters(cfg);
  const SrSample s = make_sr_sample(synth_scene(6, n, n), 4);
  for (auto _ : state) benchmark::DoNotOptimize(forward(s.lr_depth, s.hr_color, cfg, p));
}
BENCHMARK(BM_ToyForward)->Arg(64)->Arg(128);

void BM_ToyLossGradients(benchmark::State& state) {
  const NetworkConfig cfg = NetworkConfig::toy();
  const Parameters p = init_parameters(cfg);
  const SrSample s = make_sr_sample(synth_scene(7, 64, 64), 4);
  for (auto _ : state) benchmark::DoNotOptimize(loss_gradients(s, cfg, p, LossWeights{}));
}
BENCHMARK(BM_ToyLossGradients);

}  // namespace

BENCHMARK_MAIN();
