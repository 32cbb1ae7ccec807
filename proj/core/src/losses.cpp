#include "depthsr/losses.hpp"

#include <cmath>

#include "depthsr/error.hpp"
#include "depthsr/hash.hpp"
#include "depthsr/imaging.hpp"

namespace depthsr {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_pair(const Plane& pred, const Plane& gt, const char* what) {
  DEPTHSR_REQUIRE(pred.same_shape(gt), std::string(what) + ": prediction and ground truth shapes differ");
}

}  // namespace

void LossWeights::validate() const {
  for (double l : {lambda1, lambda2, lambda3}) {
    DEPTHSR_REQUIRE(std::isfinite(l) && l >= 0.0, "loss weights must be finite and nonnegative");
  }
  DEPTHSR_REQUIRE(lambda1 > 0.0 || lambda2 > 0.0 || lambda3 > 0.0, "at least one loss weight must be positive");
}

LossTerm l1_loss(const Plane& pred, const Plane& gt) {
  check_pair(pred, gt, "l1_loss");
  const double n = static_cast<double>(pred.size());
  LossTerm out{0.0, Plane(pred.height(), pred.width())};
  auto p = pred.values();
  auto g = gt.values();
  auto d = out.grad.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double diff = p[i] - g[i];
    out.value += std::abs(diff);
    d[i] = sign(diff) / n;
  }
  out.value /= n;
  return out;
}

LossTerm edge_loss(const Plane& pred, const Plane& gt) {
  check_pair(pred, gt, "edge_loss");
  const SobelResponse sp = sobel(pred, kEdgeKernel);
  const Plane mg = sobel_magnitude(gt, kEdgeKernel);
  const double n = static_cast<double>(pred.size());

  Plane dgx(pred.height(), pred.width());
  Plane dgy(pred.height(), pred.width());
  double value = 0.0;
  for (int r = 0; r < pred.height(); ++r)
    for (int c = 0; c < pred.width(); ++c) {
      const double diff = sp.magnitude(r, c) - mg(r, c);
      value += std::abs(diff);
      const double u = sign(diff) / n;
      dgx(r, c) = u * sign(sp.gx(r, c));
      dgy(r, c) = u * sign(sp.gy(r, c));
    }
  return {value / n, sobel_adjoint(dgx, dgy, kEdgeKernel)};
}

LossTerm structure_loss(const Plane& pred, const Plane& gt) {
  check_pair(pred, gt, "structure_loss");
  SsimGradient s = ssim_mean_with_gradient(pred, gt, SsimParams{kStructureWindow});
  for (double& v : s.grad_a.values()) v = -v;
  return {1.0 - s.value, std::move(s.grad_a)};
}

LossValue total_loss(const Plane& pred, const Plane& gt, const LossWeights& w) {
  w.validate();
  check_pair(pred, gt, "total_loss");
  LossValue out;
  out.grad_wrt_prediction = Plane(pred.height(), pred.width());
  auto accumulate = [&](const LossTerm& term, double weight) {
    auto g = out.grad_wrt_prediction.values();
    auto t = term.grad.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += weight * t[i];
  };
  if (w.lambda1 > 0.0) {
    LossTerm t = l1_loss(pred, gt);
    out.l1 = t.value;
    accumulate(t, w.lambda1);
  }
  if (w.lambda2 > 0.0) {
    LossTerm t = edge_loss(pred, gt);
    out.edge = t.value;
    accumulate(t, w.lambda2);
  }
  if (w.lambda3 > 0.0) {
    LossTerm t = structure_loss(pred, gt);
    out.structure = t.value;
    accumulate(t, w.lambda3);
  }
  out.total = w.lambda1 * out.l1 + w.lambda2 * out.edge + w.lambda3 * out.structure;
  return out;
}

std::uint64_t loss_branch_signature(const Plane& pred, const Plane& gt, const LossWeights& w) {
  Fnv1a h;
  auto mix_sign = [&h](double v) { h.mix(static_cast<std::uint8_t>(v > 0.0 ? 2 : (v < 0.0 ? 0 : 1))); };
  if (w.lambda1 > 0.0) {
    auto p = pred.values();
    auto g = gt.values();
    for (std::size_t i = 0; i < p.size(); ++i) mix_sign(p[i] - g[i]);
  }
  if (w.lambda2 > 0.0) {
    const SobelResponse sp = sobel(pred, kEdgeKernel);
    const Plane mg = sobel_magnitude(gt, kEdgeKernel);
    for (std::size_t i = 0; i < mg.size(); ++i) {
      mix_sign(sp.gx.values()[i]);
      mix_sign(sp.gy.values()[i]);
      mix_sign(sp.magnitude.values()[i] - mg.values()[i]);
    }
  }
  return h.digest();
}

}  // namespace depthsr
