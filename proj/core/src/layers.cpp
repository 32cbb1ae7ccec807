#include "depthsr/layers.hpp"

#include <algorithm>

namespace depthsr::layers {

namespace {

inline std::size_t widx(int o, int c, int cin, int k, int ky, int kx) {
  return ((static_cast<std::size_t>(o) * cin + c) * k + ky) * k + kx;
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& in, std::span<const T> weight, std::span<const T> bias, int out_channels,
                 int ksize) {
  const int cin = in.channels();
  const int h = in.height();
  const int w = in.width();
  const int pad = ksize / 2;
  DEPTHSR_REQUIRE(weight.size() == static_cast<std::size_t>(out_channels) * cin * ksize * ksize,
                  "conv2d: weight size does not match the input channel count");
  DEPTHSR_REQUIRE(bias.size() == static_cast<std::size_t>(out_channels), "conv2d: bias size mismatch");

  Tensor<T> out(out_channels, h, w);
  for (int o = 0; o < out_channels; ++o) {
    T* op = out.channel(o);
    std::fill(op, op + out.plane_size(), bias[static_cast<std::size_t>(o)]);
    for (int c = 0; c < cin; ++c) {
      const T* ip = in.channel(c);
      for (int ky = 0; ky < ksize; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy);
        const int y1 = std::min(h, h - dy);
        for (int kx = 0; kx < ksize; ++kx) {
          const T wv = weight[widx(o, c, cin, ksize, ky, kx)];
          if (wv == T(0)) continue;
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(w, w - dx);
          for (int y = y0; y < y1; ++y) {
            T* orow = op + static_cast<std::size_t>(y) * w;
            const T* irow = ip + static_cast<std::ptrdiff_t>(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
void conv2d_backward(const Tensor<T>& in, std::span<const T> weight, int ksize, const Tensor<T>& grad_out,
                     Tensor<T>* grad_in, std::span<T> grad_weight, std::span<T> grad_bias) {
  const int cin = in.channels();
  const int cout = grad_out.channels();
  const int h = in.height();
  const int w = in.width();
  const int pad = ksize / 2;

  for (int o = 0; o < cout; ++o) {
    const T* gp = grad_out.channel(o);
    T acc = 0;
    for (std::size_t i = 0; i < grad_out.plane_size(); ++i) acc += gp[i];
    grad_bias[static_cast<std::size_t>(o)] += acc;

    for (int c = 0; c < cin; ++c) {
      const T* ip = in.channel(c);
      T* gip = grad_in ? grad_in->channel(c) : nullptr;
      for (int ky = 0; ky < ksize; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy);
        const int y1 = std::min(h, h - dy);
        for (int kx = 0; kx < ksize; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(w, w - dx);
          const std::size_t wi = widx(o, c, cin, ksize, ky, kx);
          const T wv = weight[wi];
          T dw = 0;
          for (int y = y0; y < y1; ++y) {
            const T* grow = gp + static_cast<std::size_t>(y) * w;
            const T* irow = ip + static_cast<std::ptrdiff_t>(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) dw += grow[x] * irow[x];
            if (gip && wv != T(0)) {
              T* girow = gip + static_cast<std::ptrdiff_t>(y + dy) * w + dx;
              for (int x = x0; x < x1; ++x) girow[x] += wv * grow[x];
            }
          }
          grad_weight[wi] += dw;
        }
      }
    }
  }
}

template <typename T>
Tensor<T> conv_transpose2x2(const Tensor<T>& in, std::span<const T> weight, std::span<const T> bias,
                            int out_channels) {
  const int cin = in.channels();
  const int h = in.height();
  const int w = in.width();
  DEPTHSR_REQUIRE(weight.size() == static_cast<std::size_t>(cin) * out_channels * 4,
                  "conv_transpose2x2: weight size mismatch");
  Tensor<T> out(out_channels, 2 * h, 2 * w);
  for (int o = 0; o < out_channels; ++o) {
    T* op = out.channel(o);
    std::fill(op, op + out.plane_size(), bias[static_cast<std::size_t>(o)]);
    for (int c = 0; c < cin; ++c) {
      const T* ip = in.channel(c);
      const T* wk = &weight[(static_cast<std::size_t>(c) * out_channels + o) * 4];
      for (int y = 0; y < h; ++y)
        for (int dy = 0; dy < 2; ++dy) {
          T* orow = op + static_cast<std::size_t>(2 * y + dy) * (2 * w);
          const T w0 = wk[dy * 2];
          const T w1 = wk[dy * 2 + 1];
          const T* irow = ip + static_cast<std::size_t>(y) * w;
          for (int x = 0; x < w; ++x) {
            orow[2 * x] += w0 * irow[x];
            orow[2 * x + 1] += w1 * irow[x];
          }
        }
    }
  }
  return out;
}

template <typename T>
void conv_transpose2x2_backward(const Tensor<T>& in, std::span<const T> weight, const Tensor<T>& grad_out,
                                Tensor<T>* grad_in, std::span<T> grad_weight, std::span<T> grad_bias) {
  const int cin = in.channels();
  const int cout = grad_out.channels();
  const int h = in.height();
  const int w = in.width();
  for (int o = 0; o < cout; ++o) {
    const T* gp = grad_out.channel(o);
    T acc = 0;
    for (std::size_t i = 0; i < grad_out.plane_size(); ++i) acc += gp[i];
    grad_bias[static_cast<std::size_t>(o)] += acc;
    for (int c = 0; c < cin; ++c) {
      const T* ip = in.channel(c);
      T* gip = grad_in ? grad_in->channel(c) : nullptr;
      const std::size_t base = (static_cast<std::size_t>(c) * cout + o) * 4;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const T wv = weight[base + static_cast<std::size_t>(dy * 2 + dx)];
          T dw = 0;
          for (int y = 0; y < h; ++y) {
            const T* grow = gp + static_cast<std::size_t>(2 * y + dy) * (2 * w) + dx;
            const T* irow = ip + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) dw += grow[2 * x] * irow[x];
            if (gip) {
              T* girow = gip + static_cast<std::size_t>(y) * w;
              for (int x = 0; x < w; ++x) girow[x] += wv * grow[2 * x];
            }
          }
          grad_weight[base + static_cast<std::size_t>(dy * 2 + dx)] += dw;
        }
    }
  }
}

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (T& v : x.values()) v = v > T(0) ? v : T(0);
}

template <typename T>
void relu_backward(const Tensor<T>& out, Tensor<T>& grad) {
  auto o = out.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(o[i] > T(0))) g[i] = T(0);
}

template <typename T>
Tensor<T> maxpool2(const Tensor<T>& in, std::vector<int>& argmax) {
  DEPTHSR_REQUIRE(in.height() % 2 == 0 && in.width() % 2 == 0, "maxpool2: input dimensions must be even");
  const int oh = in.height() / 2;
  const int ow = in.width() / 2;
  Tensor<T> out(in.channels(), oh, ow);
  argmax.assign(out.size(), 0);
  auto src = in.values();
  std::size_t k = 0;
  for (int c = 0; c < in.channels(); ++c)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x, ++k) {
        int best = static_cast<int>((static_cast<std::size_t>(c) * in.height() + 2 * y) * in.width() + 2 * x);
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int idx =
                static_cast<int>((static_cast<std::size_t>(c) * in.height() + 2 * y + dy) * in.width() + 2 * x + dx);
            if (src[static_cast<std::size_t>(idx)] > src[static_cast<std::size_t>(best)]) best = idx;
          }
        argmax[k] = best;
        out.values()[k] = src[static_cast<std::size_t>(best)];
      }
  return out;
}

template <typename T>
void maxpool2_backward(const Tensor<T>& grad_out, const std::vector<int>& argmax, Tensor<T>& grad_in) {
  auto g = grad_out.values();
  auto gi = grad_in.values();
  for (std::size_t k = 0; k < g.size(); ++k) gi[static_cast<std::size_t>(argmax[k])] += g[k];
}

template <typename T>
Tensor<T> upsample_nearest2(const Tensor<T>& in) {
  Tensor<T> out(in.channels(), 2 * in.height(), 2 * in.width());
  for (int c = 0; c < in.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) out(c, y, x) = in(c, y / 2, x / 2);
  return out;
}

template <typename T>
void upsample_nearest2_backward(const Tensor<T>& grad_out, Tensor<T>& grad_in) {
  for (int c = 0; c < grad_out.channels(); ++c)
    for (int y = 0; y < grad_out.height(); ++y)
      for (int x = 0; x < grad_out.width(); ++x) grad_in(c, y / 2, x / 2) += grad_out(c, y, x);
}

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts) {
  DEPTHSR_REQUIRE(!parts.empty(), "concat_channels: nothing to concatenate");
  int channels = 0;
  for (const Tensor<T>* p : parts) {
    DEPTHSR_REQUIRE(p->height() == parts[0]->height() && p->width() == parts[0]->width(),
                    "concat_channels: spatial dimensions differ");
    channels += p->channels();
  }
  Tensor<T> out(channels, parts[0]->height(), parts[0]->width());
  auto dst = out.values().begin();
  for (const Tensor<T>* p : parts) dst = std::copy(p->values().begin(), p->values().end(), dst);
  return out;
}

#define DEPTHSR_INSTANTIATE_LAYERS(T)                                                                          \
  template Tensor<T> conv2d<T>(const Tensor<T>&, std::span<const T>, std::span<const T>, int, int);            \
  template void conv2d_backward<T>(const Tensor<T>&, std::span<const T>, int, const Tensor<T>&, Tensor<T>*,    \
                                   std::span<T>, std::span<T>);                                                \
  template Tensor<T> conv_transpose2x2<T>(const Tensor<T>&, std::span<const T>, std::span<const T>, int);      \
  template void conv_transpose2x2_backward<T>(const Tensor<T>&, std::span<const T>, const Tensor<T>&,          \
                                              Tensor<T>*, std::span<T>, std::span<T>);                         \
  template void relu_inplace<T>(Tensor<T>&);                                                                   \
  template void relu_backward<T>(const Tensor<T>&, Tensor<T>&);                                                \
  template Tensor<T> maxpool2<T>(const Tensor<T>&, std::vector<int>&);                                         \
  template void maxpool2_backward<T>(const Tensor<T>&, const std::vector<int>&, Tensor<T>&);                   \
  template Tensor<T> upsample_nearest2<T>(const Tensor<T>&);                                                   \
  template void upsample_nearest2_backward<T>(const Tensor<T>&, Tensor<T>&);                                   \
  template Tensor<T> concat_channels<T>(std::span<const Tensor<T>* const>);

DEPTHSR_INSTANTIATE_LAYERS(float)
DEPTHSR_INSTANTIATE_LAYERS(double)

#undef DEPTHSR_INSTANTIATE_LAYERS

}  // namespace depthsr::layers
