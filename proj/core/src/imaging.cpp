#include "depthsr/imaging.hpp"

#include <algorithm>
#include <cmath>

#include "depthsr/error.hpp"

namespace depthsr {

// ---------------------------------------------------------------------------
// Bicubic
// ---------------------------------------------------------------------------

double cubic_weight(double x, double a) {
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  std::array<int, 4> index{};
  std::array<double, 4> weight{};
  int ref = 0;  // nearest source sample; differences are taken against it
};

std::vector<Taps> make_taps(int in_size, int out_size) {
  std::vector<Taps> taps(static_cast<std::size_t>(out_size));
  const double scale = static_cast<double>(in_size) / out_size;
  for (int x = 0; x < out_size; ++x) {
    const double src = (x + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    const int i0 = static_cast<int>(base);
    Taps& tp = taps[static_cast<std::size_t>(x)];
    for (int k = 0; k < 4; ++k) {
      tp.index[k] = std::clamp(i0 - 1 + k, 0, in_size - 1);
      tp.weight[k] = cubic_weight(t - (k - 1));
    }
    tp.ref = std::clamp(t < 0.5 ? i0 : i0 + 1, 0, in_size - 1);
  }
  return taps;
}

// Writing the sum as ref + sum w_k (s_k - ref) keeps constants and
// integer-aligned samples exact; it equals sum w_k s_k since the weights sum to 1.
inline double apply_taps(const Taps& tp, const double* line, std::ptrdiff_t stride) {
  const double ref = line[tp.ref * stride];
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) acc += tp.weight[k] * (line[tp.index[k] * stride] - ref);
  return ref + acc;
}

}  // namespace

Plane bicubic_resample(const Plane& src, int out_h, int out_w) {
  DEPTHSR_REQUIRE(out_h >= 1 && out_w >= 1, "bicubic_resample: target dimensions must be positive");
  DEPTHSR_REQUIRE(src.height() >= 2 && src.width() >= 2, "bicubic_resample: source must be at least 2x2");
  DEPTHSR_REQUIRE(src.all_finite(), "bicubic_resample: source contains non-finite values");

  const int in_h = src.height();
  const int in_w = src.width();
  const auto col_taps = make_taps(in_w, out_w);
  const auto row_taps = make_taps(in_h, out_h);

  // Horizontal pass: in_h x out_w.
  Plane tmp(in_h, out_w);
  for (int r = 0; r < in_h; ++r) {
    const double* line = &src.values()[static_cast<std::size_t>(r) * in_w];
    for (int c = 0; c < out_w; ++c) tmp(r, c) = apply_taps(col_taps[static_cast<std::size_t>(c)], line, 1);
  }
  // Vertical pass.
  Plane out(out_h, out_w);
  for (int r = 0; r < out_h; ++r) {
    const Taps& tp = row_taps[static_cast<std::size_t>(r)];
    for (int c = 0; c < out_w; ++c) out(r, c) = apply_taps(tp, &tmp.values()[static_cast<std::size_t>(c)], out_w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sobel
// ---------------------------------------------------------------------------

SobelKernels sobel_kernels(int k) {
  std::vector<double> smooth;
  std::vector<double> deriv;
  if (k == 3) {
    smooth = {1, 2, 1};
    deriv = {-1, 0, 1};
  } else if (k == 5) {
    smooth = {1, 4, 6, 4, 1};
    deriv = {-1, -2, 0, 2, 1};
  } else {
    detail::fail("sobel: kernel size must be 3 or 5, got " + std::to_string(k));
  }
  SobelKernels out{k, std::vector<double>(static_cast<std::size_t>(k * k)),
                   std::vector<double>(static_cast<std::size_t>(k * k))};
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      out.x[static_cast<std::size_t>(i * k + j)] = smooth[static_cast<std::size_t>(i)] * deriv[static_cast<std::size_t>(j)];
      out.y[static_cast<std::size_t>(i * k + j)] = deriv[static_cast<std::size_t>(i)] * smooth[static_cast<std::size_t>(j)];
    }
  return out;
}

namespace {

void check_sobel_input(int h, int w, int k) {
  DEPTHSR_REQUIRE(k % 2 == 1, "sobel: kernel size must be odd");
  DEPTHSR_REQUIRE(h >= k && w >= k, "sobel: image smaller than the kernel");
}

Plane pad_clamped(const Plane& img, int half) {
  const int h = img.height();
  const int w = img.width();
  Plane out(h + 2 * half, w + 2 * half);
  for (int r = 0; r < out.height(); ++r) {
    const int sr = std::clamp(r - half, 0, h - 1);
    for (int c = 0; c < out.width(); ++c) out(r, c) = img(sr, std::clamp(c - half, 0, w - 1));
  }
  return out;
}

}  // namespace

SobelResponse sobel(const Plane& img, int k) {
  check_sobel_input(img.height(), img.width(), k);
  const SobelKernels kern = sobel_kernels(k);
  const int half = k / 2;
  const Plane padded = pad_clamped(img, half);
  SobelResponse out{Plane(img.height(), img.width()), Plane(img.height(), img.width()),
                    Plane(img.height(), img.width())};
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      double gx = 0.0;
      double gy = 0.0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          const double v = padded(r + i, c + j);
          gx += kern.x[static_cast<std::size_t>(i * k + j)] * v;
          gy += kern.y[static_cast<std::size_t>(i * k + j)] * v;
        }
      out.gx(r, c) = gx;
      out.gy(r, c) = gy;
      out.magnitude(r, c) = std::abs(gx) + std::abs(gy);
    }
  }
  return out;
}

Plane sobel_magnitude(const Plane& img, int k) { return sobel(img, k).magnitude; }

Plane sobel_adjoint(const Plane& grad_gx, const Plane& grad_gy, int k) {
  DEPTHSR_REQUIRE(grad_gx.same_shape(grad_gy), "sobel_adjoint: gradient shapes differ");
  const int h = grad_gx.height();
  const int w = grad_gx.width();
  check_sobel_input(h, w, k);
  const SobelKernels kern = sobel_kernels(k);
  const int half = k / 2;
  Plane padded(h + 2 * half, w + 2 * half);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double gx = grad_gx(r, c);
      const double gy = grad_gy(r, c);
      if (gx == 0.0 && gy == 0.0) continue;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          padded(r + i, c + j) += kern.x[static_cast<std::size_t>(i * k + j)] * gx +
                                  kern.y[static_cast<std::size_t>(i * k + j)] * gy;
    }
  // Fold the clamped border back onto the pixels it replicated.
  Plane out(h, w);
  for (int r = 0; r < padded.height(); ++r) {
    const int sr = std::clamp(r - half, 0, h - 1);
    for (int c = 0; c < padded.width(); ++c) out(sr, std::clamp(c - half, 0, w - 1)) += padded(r, c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SSIM
// ---------------------------------------------------------------------------

std::vector<double> gaussian_window(int k, double sigma) {
  DEPTHSR_REQUIRE(k >= 1 && k % 2 == 1, "gaussian_window: size must be odd and positive");
  std::vector<double> w(static_cast<std::size_t>(k));
  const int half = k / 2;
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    const double d = i - half;
    w[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= sum;
  return w;
}

namespace {

// Separable correlation over fully-inside windows: (H-k+1) x (W-k+1).
Plane valid_filter(const Plane& img, const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  const int oh = img.height() - k + 1;
  const int ow = img.width() - k + 1;
  Plane tmp(img.height(), ow);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j) acc += w[static_cast<std::size_t>(j)] * img(r, c + j);
      tmp(r, c) = acc;
    }
  Plane out(oh, ow);
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += w[static_cast<std::size_t>(i)] * tmp(r + i, c);
      out(r, c) = acc;
    }
  return out;
}

// Adjoint of valid_filter: scatters window values back onto the H x W grid.
Plane valid_filter_adjoint(const Plane& g, const std::vector<double>& w, int h, int wd) {
  const int k = static_cast<int>(w.size());
  Plane tmp(h, g.width());
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c)
      for (int i = 0; i < k; ++i) tmp(r + i, c) += w[static_cast<std::size_t>(i)] * g(r, c);
  Plane out(h, wd);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < g.width(); ++c)
      for (int j = 0; j < k; ++j) out(r, c + j) += w[static_cast<std::size_t>(j)] * tmp(r, c);
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.height(), a.width());
  auto o = out.values();
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  return out;
}

struct SsimMaps {
  Plane mu_a, mu_b, var_a, var_b, cov;
};

SsimMaps ssim_maps(const Plane& a, const Plane& b, const std::vector<double>& w) {
  SsimMaps m{valid_filter(a, w), valid_filter(b, w), valid_filter(product(a, a), w),
             valid_filter(product(b, b), w), valid_filter(product(a, b), w)};
  auto mua = m.mu_a.values();
  auto mub = m.mu_b.values();
  auto va = m.var_a.values();
  auto vb = m.var_b.values();
  auto cv = m.cov.values();
  for (std::size_t i = 0; i < mua.size(); ++i) {
    va[i] -= mua[i] * mua[i];
    vb[i] -= mub[i] * mub[i];
    cv[i] -= mua[i] * mub[i];
  }
  return m;
}

void check_ssim_input(const Plane& a, const Plane& b, const SsimParams& p) {
  DEPTHSR_REQUIRE(a.same_shape(b), "ssim: image shapes differ");
  DEPTHSR_REQUIRE(p.window >= 1 && p.window % 2 == 1, "ssim: window size must be odd");
  DEPTHSR_REQUIRE(a.height() >= p.window && a.width() >= p.window, "ssim: image smaller than the window");
}

}  // namespace

double ssim_mean(const Plane& a, const Plane& b, const SsimParams& params) {
  return ssim_mean_with_gradient(a, b, params).value;
}

SsimGradient ssim_mean_with_gradient(const Plane& a, const Plane& b, const SsimParams& params) {
  check_ssim_input(a, b, params);
  const auto w = gaussian_window(params.window);
  const SsimMaps m = ssim_maps(a, b, w);
  const int oh = m.mu_a.height();
  const int ow = m.mu_a.width();
  const double count = static_cast<double>(oh) * ow;

  Plane alpha(oh, ow), beta(oh, ow), gamma(oh, ow);
  double total = 0.0;
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      const double mua = m.mu_a(r, c);
      const double mub = m.mu_b(r, c);
      const double a1 = 2.0 * mua * mub + params.c1;
      const double a2 = 2.0 * m.cov(r, c) + params.c2;
      const double b1 = mua * mua + mub * mub + params.c1;
      const double b2 = m.var_a(r, c) + m.var_b(r, c) + params.c2;
      const double den = b1 * b2;
      total += (a1 * a2) / den;

      const double d_mu = 2.0 * mub * a2 / den - 2.0 * mua * a1 * a2 / (b1 * den);
      const double d_var = -a1 * a2 / (den * b2);
      const double d_cov = 2.0 * a1 / den;
      alpha(r, c) = (d_mu - 2.0 * mua * d_var - mub * d_cov) / count;
      beta(r, c) = d_var / count;
      gamma(r, c) = d_cov / count;
    }

  SsimGradient out{total / count, valid_filter_adjoint(alpha, w, a.height(), a.width())};
  const Plane tb = valid_filter_adjoint(beta, w, a.height(), a.width());
  const Plane tg = valid_filter_adjoint(gamma, w, a.height(), a.width());
  auto g = out.grad_a.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * av[i] * tb.values()[i] + bv[i] * tg.values()[i];
  return out;
}

}  // namespace depthsr
