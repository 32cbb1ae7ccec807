#include "depthsr/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "depthsr/error.hpp"
#include "depthsr/imaging.hpp"

namespace depthsr {

DepthMap bicubic_sr(const SrSample& sample) {
  sample.validate();
  return DepthMap(clip_unit(bicubic_resample(sample.lr_depth.values, sample.hr_color.height(), sample.hr_color.width())),
                  sample.lr_depth.unit_scale);
}

Plane box_mean(const Plane& src, int radius) {
  DEPTHSR_REQUIRE(radius >= 0, "box_mean: radius must be nonnegative");
  const int h = src.height();
  const int w = src.width();
  // Summed-area table with a zero border row/column.
  std::vector<double> sat(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
  auto at = [w](int r, int c) { return static_cast<std::size_t>(r) * (w + 1) + c; };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) sat[at(r + 1, c + 1)] = src(r, c) + sat[at(r, c + 1)] + sat[at(r + 1, c)] - sat[at(r, c)];
  Plane out(h, w);
  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(0, r - radius);
    const int r1 = std::min(h, r + radius + 1);
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(0, c - radius);
      const int c1 = std::min(w, c + radius + 1);
      const double sum = sat[at(r1, c1)] - sat[at(r0, c1)] - sat[at(r1, c0)] + sat[at(r0, c0)];
      out(r, c) = sum / static_cast<double>((r1 - r0) * (c1 - c0));
    }
  }
  return out;
}

Plane guided_filter(const Plane& guide, const Plane& src, int radius, double eps) {
  DEPTHSR_REQUIRE(guide.same_shape(src), "guided_filter: guide and source differ in shape");
  DEPTHSR_REQUIRE(radius >= 1, "guided_filter: radius must be >= 1");
  DEPTHSR_REQUIRE(eps > 0.0, "guided_filter: eps must be positive");
  DEPTHSR_REQUIRE(src.height() >= 2 * radius + 1 && src.width() >= 2 * radius + 1,
                  "guided_filter: image smaller than the filter window");
  const std::size_t n = src.size();
  auto gi = guide.values();
  auto sp = src.values();
  Plane ii(src.height(), src.width());
  Plane ip(src.height(), src.width());
  for (std::size_t k = 0; k < n; ++k) {
    ii.values()[k] = gi[k] * gi[k];
    ip.values()[k] = gi[k] * sp[k];
  }
  const Plane mean_i = box_mean(guide, radius);
  const Plane mean_p = box_mean(src, radius);
  const Plane corr_ii = box_mean(ii, radius);
  const Plane corr_ip = box_mean(ip, radius);
  Plane a(src.height(), src.width());
  Plane b(src.height(), src.width());
  for (std::size_t k = 0; k < n; ++k) {
    const double mi = mean_i.values()[k];
    const double mp = mean_p.values()[k];
    const double var = corr_ii.values()[k] - mi * mi;
    const double cov = corr_ip.values()[k] - mi * mp;
    a.values()[k] = cov / (var + eps);
    b.values()[k] = mp - a.values()[k] * mi;
  }
  const Plane mean_a = box_mean(a, radius);
  const Plane mean_b = box_mean(b, radius);
  Plane out(src.height(), src.width());
  for (std::size_t k = 0; k < n; ++k) out.values()[k] = mean_a.values()[k] * gi[k] + mean_b.values()[k];
  return out;
}

DepthMap guided_filter_sr(const SrSample& sample, int radius, double eps) {
  sample.validate();
  const Plane up = bicubic_resample(sample.lr_depth.values, sample.hr_color.height(), sample.hr_color.width());
  return DepthMap(clip_unit(guided_filter(sample.hr_color.luma(), up, radius, eps)), sample.lr_depth.unit_scale);
}

}  // namespace depthsr
