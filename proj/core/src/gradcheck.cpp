#include "depthsr/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "depthsr/error.hpp"
#include "depthsr/imaging.hpp"

namespace depthsr {

SrSample gradcheck_sample(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int scale = 2;
  const int size = std::max(16, cfg.size_multiple());
  const int lr_size = size / scale;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);

  Plane lr(lr_size, lr_size);
  for (int r = 0; r < lr_size; ++r)
    for (int c = 0; c < lr_size; ++c)
      lr(r, c) = 0.3 + 0.2 * (r + c) / static_cast<double>(2 * (lr_size - 1)) + noise(rng);

  ColorImage color(size, size);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) color.at(ch, r, c) = unit(rng);

  Plane gt(size, size);
  for (double& v : gt.values()) v = 0.65 + 0.5 * noise(rng);

  SrSample s;
  s.lr_depth = DepthMap(std::move(lr));
  s.hr_color = std::move(color);
  s.hr_depth_gt = DepthMap(std::move(gt));
  s.scale = scale;
  s.source_id = "gradcheck_" + std::to_string(seed);
  return s;
}

double gradcheck_gate(const LossWeights& w) {
  return (w.lambda2 == 0.0 && w.lambda3 == 0.0) ? kGradcheckL1Gate : kGradcheckGate;
}

namespace {

struct Entry {
  std::size_t tensor;
  std::size_t index;
};

}  // namespace

GradcheckResult grad_check(const NetworkConfig& cfg, const LossWeights& w, const GradcheckOptions& opts) {
  cfg.validate();
  w.validate();
  DEPTHSR_REQUIRE(opts.eps > 0.0, "gradcheck eps must be positive");
  NetworkConfig net = cfg;
  net.seed = opts.seed;
  const SrSample sample = gradcheck_sample(net, opts.seed);
  Parameters p = init_parameters(net);

  LossGradients analytic = loss_gradients(sample, net, p, w, Precision::Double);
  if (opts.inject_fault)
    for (auto& t : analytic.grads.tensors())
      for (double& g : t.values) g *= 1.01;

  std::vector<Entry> entries;
  for (std::size_t t = 0; t < p.tensors().size(); ++t)
    for (std::size_t i = 0; i < p.tensors()[t].size(); ++i) entries.push_back({t, i});

  GradcheckResult res;
  res.total_params = entries.size();
  if (entries.size() > opts.full_check_limit) {
    std::mt19937_64 rng(opts.seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    entries.resize(std::min(entries.size(), std::max<std::size_t>(opts.subsample, 500)));
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.tensor != b.tensor ? a.tensor < b.tensor : a.index < b.index; });
  }

  const std::uint64_t base_sig = branch_signature(sample, net, p, w);
  for (const Entry& e : entries) {
    const std::string& name = p.tensors()[e.tensor].name;
    const double a = analytic.grads.tensors()[e.tensor].values[e.index];
    if (std::abs(a) <= kGradcheckFloor) {
      ++res.below_floor;
      continue;
    }
    double& theta = p.tensors()[e.tensor].values[e.index];
    const double orig = theta;
    bool ok = false;
    double numeric = 0.0;
    for (double h = opts.eps; h >= opts.eps * 1e-2 && !ok; h *= 0.1) {
      theta = orig + h;
      const bool plus_same = branch_signature(sample, net, p, w) == base_sig;
      const double lp = loss_value(sample, net, p, w);
      theta = orig - h;
      const bool minus_same = branch_signature(sample, net, p, w) == base_sig;
      const double lm = loss_value(sample, net, p, w);
      theta = orig;
      if (plus_same && minus_same) {
        numeric = (lp - lm) / (2.0 * h);
        ok = true;
      }
    }
    if (!ok) {
      ++res.excluded;
      continue;
    }
    const double rel = std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric));
    ++res.checked;
    GroupError& g = res.groups[name];
    ++g.checked;
    g.max_rel_error = std::max(g.max_rel_error, rel);
    if (rel > res.max_rel_error || res.worst_entry.empty()) {
      res.max_rel_error = std::max(res.max_rel_error, rel);
      res.worst_entry = name + "[" + std::to_string(e.index) + "]";
    }
  }
  return res;
}

}  // namespace depthsr
