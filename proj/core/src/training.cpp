#include "depthsr/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "depthsr/checkpoint.hpp"
#include "depthsr/error.hpp"

namespace depthsr {

void TrainConfig::validate() const {
  DEPTHSR_REQUIRE(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be finite and >= 0");
  DEPTHSR_REQUIRE(batch_size >= 1, "batch_size must be >= 1");
  DEPTHSR_REQUIRE(epochs >= 1, "epochs must be >= 1");
  DEPTHSR_REQUIRE(max_steps >= 0, "max_steps must be >= 0");
  DEPTHSR_REQUIRE(checkpoint_every >= 0, "checkpoint_every must be >= 0");
  DEPTHSR_REQUIRE(checkpoint_every == 0 || !checkpoint_path.empty(), "checkpoint_every needs a checkpoint path");
  DEPTHSR_REQUIRE(threads >= 1, "threads must be >= 1");
  DEPTHSR_REQUIRE(is_supported_scale(scale), "scale must be one of 2, 4, 8, 16");
  loss_weights.validate();
}

bool TrainLog::same_losses(const TrainLog& other) const {
  if (records.size() != other.records.size()) return false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& a = records[i];
    const auto& b = other.records[i];
    if (a.step != b.step || a.epoch != b.epoch || a.total != b.total || a.l1 != b.l1 || a.edge != b.edge ||
        a.structure != b.structure)
      return false;
  }
  return final_digest == other.final_digest;
}

void TrainLog::write_csv(const std::string& path) const {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp);
    DEPTHSR_REQUIRE(out.good(), "cannot write training log " + path);
    char buf[256];
    std::snprintf(buf, sizeof buf, "# optimizer=adam lr=%.17g beta1=%.17g beta2=%.17g epsilon=%.17g\n", learning_rate,
                  beta1, beta2, epsilon);
    out << buf << "# final_digest=" << final_digest << "\n";
    out << "step,epoch,total,l1,edge,structure,seconds\n";
    for (const auto& r : records) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.step, r.epoch, r.total, r.l1, r.edge,
                    r.structure, r.seconds);
      out << buf;
    }
    DEPTHSR_REQUIRE(out.good(), "failed writing training log " + path);
  }
  std::filesystem::rename(tmp, path);
}

Adam::Adam(const Parameters& like, double learning_rate)
    : lr_(learning_rate), m_(like.zeros_like()), v_(like.zeros_like()) {}

void Adam::step(Parameters& p, const Parameters& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
  auto& pt = p.tensors();
  const auto& gt = grad.tensors();
  DEPTHSR_REQUIRE(pt.size() == gt.size(), "gradient layout does not match parameters");
  for (std::size_t t = 0; t < pt.size(); ++t) {
    auto& w = pt[t].values;
    const auto& g = gt[t].values;
    auto& m = m_.tensors()[t].values;
    auto& v = v_.tensors()[t].values;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      w[i] -= lr_ * mh / (std::sqrt(vh) + kAdamEpsilon);
    }
  }
}

namespace {

std::vector<LossGradients> batch_gradients(const std::vector<SrSample>& data, const std::vector<std::size_t>& idx,
                                           const NetworkConfig& net_cfg, const Parameters& p, const TrainConfig& cfg) {
  std::vector<LossGradients> out(idx.size());
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), idx.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < idx.size(); ++i)
      out[i] = loss_gradients(data[idx[i]], net_cfg, p, cfg.loss_weights, cfg.precision);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < idx.size(); i += workers)
          out[i] = loss_gradients(data[idx[i]], net_cfg, p, cfg.loss_weights, cfg.precision);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<SrSample>& data, const NetworkConfig& net_cfg,
                  const std::optional<Parameters>& init, const ProgressFn& progress) {
  cfg.validate();
  net_cfg.validate();
  DEPTHSR_REQUIRE(!data.empty(), "training data is empty");
  for (const auto& s : data) {
    DEPTHSR_REQUIRE(s.scale == cfg.scale, "sample '" + s.source_id + "' has scale " + std::to_string(s.scale) +
                                              ", training scale is " + std::to_string(cfg.scale));
    s.validate();
  }

  TrainResult res;
  res.params = init ? *init : init_parameters(net_cfg);
  DEPTHSR_REQUIRE(res.params.tensors().size() == parameter_layout(net_cfg).size(),
                  "initial parameters do not match the network config");
  res.log.learning_rate = cfg.learning_rate;
  Adam opt(res.params, cfg.learning_rate);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  const auto t0 = std::chrono::steady_clock::now();
  int step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      if (cfg.max_steps > 0 && step >= cfg.max_steps) break;
      ++step;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      const auto per_sample = batch_gradients(data, idx, net_cfg, res.params, cfg);

      const double inv = 1.0 / static_cast<double>(idx.size());
      Parameters grad = res.params.zeros_like();
      TrainRecord rec;
      rec.step = step;
      rec.epoch = epoch;
      for (const LossGradients& lg : per_sample) {
        rec.total += lg.loss.total * inv;
        rec.l1 += lg.loss.l1 * inv;
        rec.edge += lg.loss.edge * inv;
        rec.structure += lg.loss.structure * inv;
        for (std::size_t t = 0; t < grad.tensors().size(); ++t) {
          auto& dst = grad.tensors()[t].values;
          const auto& src = lg.grads.tensors()[t].values;
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i] * inv;
        }
      }
      if (!std::isfinite(rec.total) || !grad.all_finite())
        throw NumericalError("non-finite loss or gradient at step " + std::to_string(step) + " (epoch " +
                             std::to_string(epoch) + ")");
      opt.step(res.params, grad);
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      res.log.records.push_back(rec);
      if (progress) progress(rec);
      if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0)
        save_checkpoint(res.params, net_cfg, cfg.checkpoint_path);
    }
    if (cfg.max_steps > 0 && step >= cfg.max_steps) break;
  }
  DEPTHSR_REQUIRE(res.params.all_finite(), "parameters became non-finite");
  res.log.final_digest = res.params.digest();
  return res;
}

ProgressFn stderr_progress(int every) {
  return [every](const TrainRecord& r) {
    if (every > 0 && r.step % every == 0)
      std::fprintf(stderr, "step %6d  epoch %3d  loss %.6f  (l1 %.5f edge %.5f structure %.5f)  %.1fs\n", r.step,
                   r.epoch, r.total, r.l1, r.edge, r.structure, r.seconds);
  };
}

}  // namespace depthsr
