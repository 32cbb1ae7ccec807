#include "depthsr/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "depthsr/error.hpp"
#include "depthsr/hash.hpp"
#include "depthsr/imaging.hpp"
#include "depthsr/layers.hpp"

namespace depthsr {

// ---------------------------------------------------------------------------
// Enums
// ---------------------------------------------------------------------------

std::string to_string(UpsampleMode m) { return m == UpsampleMode::NearestConv ? "nearest" : "transposed"; }

UpsampleMode parse_upsample_mode(const std::string& s) {
  if (s == "nearest") return UpsampleMode::NearestConv;
  if (s == "transposed") return UpsampleMode::TransposedConv;
  detail::fail("unknown upsample mode '" + s + "' (expected nearest or transposed)");
}

std::string to_string(Precision p) { return p == Precision::Double ? "double" : "single"; }

Precision parse_precision(const std::string& s) {
  if (s == "double") return Precision::Double;
  if (s == "single") return Precision::Single;
  detail::fail("unknown precision '" + s + "' (expected double or single)");
}

// ---------------------------------------------------------------------------
// NetworkConfig
// ---------------------------------------------------------------------------

NetworkConfig NetworkConfig::toy() { return NetworkConfig{}; }

NetworkConfig NetworkConfig::full_scale() {
  NetworkConfig cfg;
  cfg.levels = 5;
  cfg.base_channels = 64;
  cfg.dense_layers_per_block = 6;
  cfg.dense_growth = 32;
  cfg.transition_channels = 128;
  cfg.depth_channels = 64;
  cfg.decoder_channels = {256, 128, 64, 64, 32, 32};
  return cfg;
}

void NetworkConfig::validate() const {
  DEPTHSR_REQUIRE(levels >= 2 && levels <= 8, "network.levels must be in [2, 8]");
  DEPTHSR_REQUIRE(base_channels >= 1, "network.base_channels must be >= 1");
  DEPTHSR_REQUIRE(dense_layers_per_block >= 1, "network.dense_layers must be >= 1");
  DEPTHSR_REQUIRE(dense_growth >= 1, "network.dense_growth must be >= 1");
  DEPTHSR_REQUIRE(transition_channels >= 1, "network.transition_channels must be >= 1");
  DEPTHSR_REQUIRE(depth_channels >= 1, "network.depth_channels must be >= 1");
  DEPTHSR_REQUIRE(decoder_channels.size() == static_cast<std::size_t>(levels + 1),
                  "network.decoder_channels needs levels + 1 = " + std::to_string(levels + 1) + " entries");
  for (int c : decoder_channels) DEPTHSR_REQUIRE(c >= 1, "network.decoder_channels entries must be >= 1");
}

std::string NetworkConfig::serialize() const {
  std::ostringstream os;
  os << "levels = " << levels << "\n"
     << "base_channels = " << base_channels << "\n"
     << "dense_layers = " << dense_layers_per_block << "\n"
     << "dense_growth = " << dense_growth << "\n"
     << "transition_channels = " << transition_channels << "\n"
     << "depth_channels = " << depth_channels << "\n"
     << "decoder_channels = ";
  for (std::size_t i = 0; i < decoder_channels.size(); ++i) os << (i ? "," : "") << decoder_channels[i];
  os << "\n"
     << "upsample_mode = " << to_string(upsample_mode) << "\n"
     << "residual = " << (residual ? "true" : "false") << "\n"
     << "seed = " << seed << "\n";
  return os.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    DEPTHSR_REQUIRE(pos == v.size(), "");
    return static_cast<int>(x);
  } catch (const std::exception&) {
    detail::fail("network." + key + ": expected an integer, got '" + v + "'");
  }
}

}  // namespace

NetworkConfig NetworkConfig::parse(const std::string& text) {
  NetworkConfig cfg;
  std::istringstream is(text);
  std::string line;
  bool decoder_given = false;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    DEPTHSR_REQUIRE(eq != std::string::npos, "network config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "levels") {
      cfg.levels = parse_int(key, val);
    } else if (key == "base_channels") {
      cfg.base_channels = parse_int(key, val);
    } else if (key == "dense_layers") {
      cfg.dense_layers_per_block = parse_int(key, val);
    } else if (key == "dense_growth") {
      cfg.dense_growth = parse_int(key, val);
    } else if (key == "transition_channels") {
      cfg.transition_channels = parse_int(key, val);
    } else if (key == "depth_channels") {
      cfg.depth_channels = parse_int(key, val);
    } else if (key == "decoder_channels") {
      cfg.decoder_channels.clear();
      std::istringstream ls(val);
      std::string item;
      while (std::getline(ls, item, ',')) cfg.decoder_channels.push_back(parse_int(key, trim(item)));
      decoder_given = true;
    } else if (key == "upsample_mode") {
      cfg.upsample_mode = parse_upsample_mode(val);
    } else if (key == "residual") {
      DEPTHSR_REQUIRE(val == "true" || val == "false", "network.residual must be true or false");
      cfg.residual = val == "true";
    } else if (key == "seed") {
      try {
        cfg.seed = std::stoull(val);
      } catch (const std::exception&) {
        detail::fail("network.seed: expected an unsigned integer, got '" + val + "'");
      }
    } else {
      detail::fail("unknown network config key '" + key + "'");
    }
  }
  // A single decoder width broadcasts to every fusion module.
  if (decoder_given && cfg.decoder_channels.size() == 1)
    cfg.decoder_channels.assign(static_cast<std::size_t>(cfg.levels + 1), cfg.decoder_channels[0]);
  if (!decoder_given && cfg.decoder_channels.size() != static_cast<std::size_t>(cfg.levels + 1))
    cfg.decoder_channels.assign(static_cast<std::size_t>(cfg.levels + 1), cfg.decoder_channels.back());
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

Parameters::Parameters(std::vector<ParamTensor> tensors) : tensors_(std::move(tensors)) {
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    for (std::size_t j = i + 1; j < tensors_.size(); ++j)
      DEPTHSR_REQUIRE(tensors_[i].name != tensors_[j].name, "duplicate parameter name " + tensors_[i].name);
}

const ParamTensor* Parameters::find(const std::string& name) const {
  for (const auto& t : tensors_)
    if (t.name == name) return &t;
  return nullptr;
}

ParamTensor& Parameters::at(const std::string& name) {
  for (auto& t : tensors_)
    if (t.name == name) return t;
  detail::fail("no parameter named " + name);
}

const ParamTensor& Parameters::at(const std::string& name) const {
  const ParamTensor* t = find(name);
  DEPTHSR_REQUIRE(t != nullptr, "no parameter named " + name);
  return *t;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

Parameters Parameters::zeros_like() const {
  Parameters out = *this;
  for (auto& t : out.tensors_) std::fill(t.values.begin(), t.values.end(), 0.0);
  return out;
}

bool Parameters::all_finite() const {
  for (const auto& t : tensors_)
    for (double v : t.values)
      if (!std::isfinite(v)) return false;
  return true;
}

std::string Parameters::digest() const {
  Fnv1a h;
  for (const auto& t : tensors_) {
    h.mix(t.name);
    h.mix(std::span<const double>(t.values));
  }
  return h.hex();
}

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

namespace {

struct ConvSpec {
  std::string name;
  int in = 0;
  int out = 0;
  int ksize = 3;
  bool transposed = false;
  bool relu = true;
};

struct Layout {
  std::vector<ConvSpec> convs;
  int color_stem = -1;
  std::vector<std::vector<int>> color_dense;  // [level-2][layer]
  std::vector<int> color_transition;          // [level-2]
  int depth_stem0 = -1;
  int depth_stem1 = -1;
  std::vector<int> depth_down;  // [level-1]
  int first_up = -1;
  std::vector<int> step_merge;  // [i-1]
  std::vector<int> step_up;     // [i-1]
  int last_merge = -1;
  int last_refine = -1;
  int last_out = -1;
  std::vector<int> color_channels;  // C_1..C_L
  int depth_out = 0;

  int add(ConvSpec s) {
    convs.push_back(std::move(s));
    return static_cast<int>(convs.size()) - 1;
  }
};

Layout build_layout(const NetworkConfig& cfg) {
  cfg.validate();
  Layout lay;
  const int levels = cfg.levels;
  const bool tconv = cfg.upsample_mode == UpsampleMode::TransposedConv;
  auto up_spec = [&](std::string name, int in, int out) {
    return ConvSpec{std::move(name), in, out, tconv ? 2 : 3, tconv, true};
  };

  lay.color_stem = lay.add({"color.stem", ColorImage::kChannels, cfg.base_channels});
  lay.color_channels.push_back(cfg.base_channels);
  for (int l = 2; l <= levels; ++l) {
    const int cin = lay.color_channels.back();
    std::vector<int> dense;
    for (int j = 0; j < cfg.dense_layers_per_block; ++j) {
      dense.push_back(lay.add({"color.block" + std::to_string(l) + ".dense" + std::to_string(j + 1),
                               cin + j * cfg.dense_growth, cfg.dense_growth}));
    }
    lay.color_dense.push_back(std::move(dense));
    lay.color_transition.push_back(lay.add({"color.block" + std::to_string(l) + ".transition",
                                            cin + cfg.dense_layers_per_block * cfg.dense_growth,
                                            cfg.transition_channels}));
    lay.color_channels.push_back(cfg.transition_channels);
  }

  const int a = cfg.depth_channels;
  lay.depth_stem0 = lay.add({"depth.stem0", 1, a});
  lay.depth_stem1 = lay.add({"depth.stem1", a, a});
  for (int r = 1; r <= levels; ++r) lay.depth_down.push_back(lay.add({"depth.down" + std::to_string(r), a, a}));
  lay.depth_out = a;

  const auto& dec = cfg.decoder_channels;
  lay.first_up = lay.add(up_spec("fusion.first.up", lay.color_channels.back() + a, dec[0]));
  for (int i = 1; i <= levels - 1; ++i) {
    const int color_ch = lay.color_channels[static_cast<std::size_t>(levels - i - 1)];
    const std::string prefix = "fusion.step" + std::to_string(i);
    lay.step_merge.push_back(
        lay.add({prefix + ".merge", dec[static_cast<std::size_t>(i - 1)] + color_ch + a, dec[static_cast<std::size_t>(i)]}));
    lay.step_up.push_back(lay.add(up_spec(prefix + ".up", dec[static_cast<std::size_t>(i)], dec[static_cast<std::size_t>(i)])));
  }
  const int last_w = dec[static_cast<std::size_t>(levels)];
  lay.last_merge = lay.add({"fusion.last.merge", dec[static_cast<std::size_t>(levels - 1)] + ColorImage::kChannels + a, last_w});
  lay.last_refine = lay.add({"fusion.last.refine", last_w, last_w});
  lay.last_out = lay.add({"fusion.last.out", last_w, 1, 3, false, false});
  return lay;
}

std::vector<int> weight_shape(const ConvSpec& s) {
  if (s.transposed) return {s.in, s.out, 2, 2};
  return {s.out, s.in, s.ksize, s.ksize};
}

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

std::vector<std::pair<std::string, std::vector<int>>> parameter_layout(const NetworkConfig& cfg) {
  const Layout lay = build_layout(cfg);
  std::vector<std::pair<std::string, std::vector<int>>> out;
  for (const auto& s : lay.convs) {
    out.emplace_back(s.name + ".weight", weight_shape(s));
    out.emplace_back(s.name + ".bias", std::vector<int>{s.out});
  }
  return out;
}

Parameters init_parameters(const NetworkConfig& cfg) {
  const Layout lay = build_layout(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::vector<ParamTensor> tensors;
  for (const auto& s : lay.convs) {
    const auto shape = weight_shape(s);
    const int fan_in = s.transposed ? s.in : s.in * s.ksize * s.ksize;
    // He-uniform for ReLU layers; the linear output projection starts small
    // so the initial prediction stays close to the bicubic upscale.
    const double bound = s.relu ? std::sqrt(6.0 / fan_in) : 0.1 * std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    ParamTensor w{s.name + ".weight", shape, std::vector<double>(shape_size(shape))};
    for (double& v : w.values) v = dist(rng);
    tensors.push_back(std::move(w));
    tensors.push_back(ParamTensor{s.name + ".bias", {s.out}, std::vector<double>(static_cast<std::size_t>(s.out), 0.0)});
  }
  return Parameters(std::move(tensors));
}

// ---------------------------------------------------------------------------
// FusionSchedule
// ---------------------------------------------------------------------------

FusionSchedule FusionSchedule::build(const NetworkConfig& cfg, int height, int width) {
  cfg.validate();
  const int mult = cfg.size_multiple();
  DEPTHSR_REQUIRE(height > 0 && width > 0 && height % mult == 0 && width % mult == 0,
                  "input " + std::to_string(height) + "x" + std::to_string(width) + " is not divisible by 2^(levels+1) = " +
                      std::to_string(mult));
  FusionSchedule s;
  s.k = cfg.levels + 2;
  s.role_assignment = "color <- m = k-i-2 (at H/2^m), depth <- n = k-i-1 (at H/2^(n-1)), matched by resolution";
  auto color_size = [&](int idx, int dim) { return dim >> idx; };
  auto depth_size = [&](int idx, int dim) { return dim >> (idx - 1); };
  // The first fusion upsamples the deepest pair from H/2^L to H/2^(L-1).
  int prev_h = height >> (cfg.levels - 1);
  int prev_w = width >> (cfg.levels - 1);
  for (int i = 1; i <= cfg.levels - 1; ++i) {
    FusionStep st{i, s.k - i - 2, s.k - i - 1, prev_h, prev_w};
    const bool ok = color_size(st.color_index, height) == prev_h && color_size(st.color_index, width) == prev_w &&
                    depth_size(st.depth_index, height) == prev_h && depth_size(st.depth_index, width) == prev_w;
    DEPTHSR_REQUIRE(ok, "fusion step " + std::to_string(i) + " would fuse features of different resolutions");
    DEPTHSR_REQUIRE(prev_h >= 1 && prev_w >= 1, "fusion step resolution collapsed to zero");
    s.steps.push_back(st);
    prev_h *= 2;
    prev_w *= 2;
  }
  DEPTHSR_REQUIRE(prev_h == height && prev_w == width, "reconstruction branch does not return to full resolution");
  return s;
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

namespace {

template <typename T>
struct TypedParams {
  std::vector<std::vector<T>> weight;
  std::vector<std::vector<T>> bias;

  TypedParams(const Layout& lay, const Parameters& p) {
    for (const auto& s : lay.convs) {
      const ParamTensor* w = p.find(s.name + ".weight");
      const ParamTensor* b = p.find(s.name + ".bias");
      DEPTHSR_REQUIRE(w && b, "parameters are missing layer " + s.name);
      DEPTHSR_REQUIRE(w->shape == weight_shape(s) && b->values.size() == static_cast<std::size_t>(s.out),
                      "parameter shapes of " + s.name + " do not match the network config");
      weight.emplace_back(w->values.begin(), w->values.end());
      bias.emplace_back(b->values.begin(), b->values.end());
    }
  }
};

enum class Op { Input, Conv, Pool, Up, Concat };

template <typename T>
class Tape {
 public:
  struct Node {
    Op op = Op::Input;
    std::vector<int> inputs;
    int layer = -1;
    bool needs_grad = true;
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<int> argmax;
  };

  Tape(const Layout& lay, const TypedParams<T>& params) : lay_(lay), params_(params) {}

  int input(Tensor<T> v, bool needs_grad = false) {
    Node n;
    n.value = std::move(v);
    n.needs_grad = needs_grad;
    return push(std::move(n));
  }

  int conv(int x, int layer) {
    const ConvSpec& s = lay_.convs[static_cast<std::size_t>(layer)];
    const auto& w = params_.weight[static_cast<std::size_t>(layer)];
    const auto& b = params_.bias[static_cast<std::size_t>(layer)];
    Node n;
    n.op = Op::Conv;
    n.inputs = {x};
    n.layer = layer;
    const Tensor<T>& in = nodes_[static_cast<std::size_t>(x)].value;
    DEPTHSR_REQUIRE(in.channels() == s.in, "layer " + s.name + " expects " + std::to_string(s.in) +
                                               " input channels, got " + std::to_string(in.channels()));
    n.value = s.transposed ? layers::conv_transpose2x2<T>(in, w, b, s.out) : layers::conv2d<T>(in, w, b, s.out, s.ksize);
    if (s.relu) layers::relu_inplace(n.value);
    return push(std::move(n));
  }

  int pool(int x) {
    Node n;
    n.op = Op::Pool;
    n.inputs = {x};
    n.value = layers::maxpool2(nodes_[static_cast<std::size_t>(x)].value, n.argmax);
    return push(std::move(n));
  }

  int up(int x) {
    Node n;
    n.op = Op::Up;
    n.inputs = {x};
    n.value = layers::upsample_nearest2(nodes_[static_cast<std::size_t>(x)].value);
    return push(std::move(n));
  }

  int concat(std::vector<int> xs) {
    std::vector<const Tensor<T>*> parts;
    for (int x : xs) parts.push_back(&nodes_[static_cast<std::size_t>(x)].value);
    Node n;
    n.op = Op::Concat;
    n.inputs = std::move(xs);
    n.value = layers::concat_channels<T>(std::span<const Tensor<T>* const>(parts));
    return push(std::move(n));
  }

  const Tensor<T>& value(int node) const { return nodes_[static_cast<std::size_t>(node)].value; }
  const Tensor<T>& grad(int node) const { return nodes_[static_cast<std::size_t>(node)].grad; }

  /// Reverse sweep seeded at `node`; parameter gradients accumulate into
  /// `gw`/`gb` (indexed like the layout's convs).
  void backward(int node, Tensor<T> seed, std::vector<std::vector<T>>& gw, std::vector<std::vector<T>>& gb) {
    nodes_[static_cast<std::size_t>(node)].grad = std::move(seed);
    for (int i = node; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.grad.empty()) continue;
      switch (n.op) {
        case Op::Input:
          break;
        case Op::Conv: {
          const ConvSpec& s = lay_.convs[static_cast<std::size_t>(n.layer)];
          if (s.relu) layers::relu_backward(n.value, n.grad);
          Node& in = nodes_[static_cast<std::size_t>(n.inputs[0])];
          Tensor<T>* gin = in.needs_grad ? &ensure_grad(in) : nullptr;
          auto& w = params_.weight[static_cast<std::size_t>(n.layer)];
          auto& dw = gw[static_cast<std::size_t>(n.layer)];
          auto& db = gb[static_cast<std::size_t>(n.layer)];
          if (s.transposed)
            layers::conv_transpose2x2_backward<T>(in.value, w, n.grad, gin, dw, db);
          else
            layers::conv2d_backward<T>(in.value, w, s.ksize, n.grad, gin, dw, db);
          break;
        }
        case Op::Pool: {
          Node& in = nodes_[static_cast<std::size_t>(n.inputs[0])];
          if (in.needs_grad) layers::maxpool2_backward(n.grad, n.argmax, ensure_grad(in));
          break;
        }
        case Op::Up: {
          Node& in = nodes_[static_cast<std::size_t>(n.inputs[0])];
          if (in.needs_grad) layers::upsample_nearest2_backward(n.grad, ensure_grad(in));
          break;
        }
        case Op::Concat: {
          std::size_t offset = 0;
          for (int x : n.inputs) {
            Node& in = nodes_[static_cast<std::size_t>(x)];
            const std::size_t len = in.value.size();
            if (in.needs_grad) {
              auto g = ensure_grad(in).values();
              auto src = n.grad.values();
              for (std::size_t k = 0; k < len; ++k) g[k] += src[offset + k];
            }
            offset += len;
          }
          break;
        }
      }
      if (n.op != Op::Input) n.grad = Tensor<T>();  // release
    }
  }

  void mix_signature(Fnv1a& h) const {
    for (const Node& n : nodes_) {
      if (n.op == Op::Conv && lay_.convs[static_cast<std::size_t>(n.layer)].relu) {
        for (T v : n.value.values()) h.mix(static_cast<std::uint8_t>(v > T(0)));
      } else if (n.op == Op::Pool) {
        h.mix_bytes(n.argmax.data(), n.argmax.size() * sizeof(int));
      }
    }
  }

 private:
  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }
  static Tensor<T>& ensure_grad(Node& n) {
    if (n.grad.empty()) n.grad = Tensor<T>(n.value.channels(), n.value.height(), n.value.width());
    return n.grad;
  }

  const Layout& lay_;
  const TypedParams<T>& params_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Graph construction
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> color_tensor(const ColorImage& img) {
  Tensor<T> t(ColorImage::kChannels, img.height(), img.width());
  auto src = img.values();
  auto dst = t.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
  return t;
}

template <typename T>
Tensor<T> plane_tensor(const Plane& p) {
  Tensor<T> t(1, p.height(), p.width());
  auto src = p.values();
  auto dst = t.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
  return t;
}

template <typename T>
std::vector<int> build_color(Tape<T>& tape, const Layout& lay, int color) {
  std::vector<int> feats;
  feats.push_back(tape.pool(tape.conv(color, lay.color_stem)));
  for (std::size_t b = 0; b < lay.color_dense.size(); ++b) {
    int x = feats.back();
    for (int layer : lay.color_dense[b]) x = tape.concat({x, tape.conv(x, layer)});
    feats.push_back(tape.pool(tape.conv(x, lay.color_transition[b])));
  }
  return feats;
}

template <typename T>
std::vector<int> build_depth(Tape<T>& tape, const Layout& lay, int depth) {
  std::vector<int> feats;
  feats.push_back(tape.conv(tape.conv(depth, lay.depth_stem0), lay.depth_stem1));
  for (int layer : lay.depth_down) feats.push_back(tape.pool(tape.conv(feats.back(), layer)));
  return feats;
}

template <typename T>
int up_stage(Tape<T>& tape, const Layout& lay, int x, int layer) {
  if (lay.convs[static_cast<std::size_t>(layer)].transposed) return tape.conv(x, layer);
  return tape.conv(tape.up(x), layer);
}

template <typename T>
int build_fusion_step(Tape<T>& tape, const Layout& lay, int prev, int color_feat, int depth_feat, int step) {
  const int merged = tape.conv(tape.concat({prev, color_feat, depth_feat}), lay.step_merge[static_cast<std::size_t>(step - 1)]);
  return up_stage(tape, lay, merged, lay.step_up[static_cast<std::size_t>(step - 1)]);
}

struct Graph {
  int color = -1;
  int depth = -1;
  std::vector<int> color_feats;
  std::vector<int> depth_feats;
  int out = -1;
};

template <typename T>
Graph build_network(Tape<T>& tape, const Layout& lay, const NetworkConfig& cfg, const ColorImage& color,
                    const Plane& upscaled) {
  Graph g;
  g.color = tape.input(color_tensor<T>(color));
  g.depth = tape.input(plane_tensor<T>(upscaled));
  g.color_feats = build_color(tape, lay, g.color);
  g.depth_feats = build_depth(tape, lay, g.depth);
  const FusionSchedule sched = FusionSchedule::build(cfg, color.height(), color.width());

  int r = up_stage(tape, lay, tape.concat({g.color_feats.back(), g.depth_feats.back()}), lay.first_up);
  for (const FusionStep& st : sched.steps) {
    // color feature m sits at index m-1; depth feature n at index n-1.
    r = build_fusion_step(tape, lay, r, g.color_feats[static_cast<std::size_t>(st.color_index - 1)],
                          g.depth_feats[static_cast<std::size_t>(st.depth_index - 1)], st.i);
  }
  const int merged = tape.conv(tape.concat({r, g.color, g.depth_feats.front()}), lay.last_merge);
  g.out = tape.conv(tape.conv(merged, lay.last_refine), lay.last_out);
  return g;
}

void check_inputs(const DepthMap& lr, const ColorImage& color, const NetworkConfig& cfg) {
  cfg.validate();
  DEPTHSR_REQUIRE(lr.height() > 0 && lr.width() > 0, "low-resolution depth is empty");
  DEPTHSR_REQUIRE(color.height() % lr.height() == 0 && color.width() % lr.width() == 0,
                  "color dimensions are not an integer multiple of the depth dimensions");
  const int s = color.height() / lr.height();
  DEPTHSR_REQUIRE(color.width() / lr.width() == s, "horizontal and vertical scale factors differ");
  DEPTHSR_REQUIRE(is_supported_scale(s), "scale factor " + std::to_string(s) + " is not one of 2, 4, 8, 16");
  const int mult = cfg.size_multiple();
  DEPTHSR_REQUIRE(color.height() % mult == 0 && color.width() % mult == 0,
                  "color dimensions must be divisible by 2^(levels+1) = " + std::to_string(mult));
  DEPTHSR_REQUIRE(lr.values.all_finite(), "low-resolution depth contains non-finite values");
}

template <typename T>
Plane output_plane(const Tensor<T>& t) {
  Plane p(t.height(), t.width());
  auto src = t.values();
  auto dst = p.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<double>(src[i]);
  return p;
}

ForwardTrace finish(const Plane& upscaled, Plane net, bool residual) {
  ForwardTrace tr;
  tr.upscaled = upscaled;
  tr.pre_clip = net;
  if (residual) {
    auto pc = tr.pre_clip.values();
    auto up = upscaled.values();
    for (std::size_t i = 0; i < pc.size(); ++i) pc[i] = up[i] + pc[i];
  }
  tr.network_out = std::move(net);
  tr.prediction = clip_unit(tr.pre_clip);
  return tr;
}

template <typename T>
LossGradients loss_gradients_impl(const SrSample& sample, const NetworkConfig& cfg, const Parameters& p,
                                  const LossWeights& w) {
  sample.validate();
  check_inputs(sample.lr_depth, sample.hr_color, cfg);
  const Layout lay = build_layout(cfg);
  const TypedParams<T> tp(lay, p);
  Tape<T> tape(lay, tp);
  const Plane up = bicubic_resample(sample.lr_depth.values, sample.hr_color.height(), sample.hr_color.width());
  const Graph g = build_network(tape, lay, cfg, sample.hr_color, up);
  const ForwardTrace tr = finish(up, output_plane(tape.value(g.out)), cfg.residual);

  LossGradients out;
  out.loss = total_loss(tr.prediction, sample.hr_depth_gt.values, w);

  Tensor<T> seed(1, up.height(), up.width());
  auto sv = seed.values();
  auto gp = out.loss.grad_wrt_prediction.values();
  auto pc = tr.pre_clip.values();
  for (std::size_t i = 0; i < sv.size(); ++i) sv[i] = (pc[i] >= 0.0 && pc[i] <= 1.0) ? static_cast<T>(gp[i]) : T(0);

  std::vector<std::vector<T>> gw;
  std::vector<std::vector<T>> gb;
  for (std::size_t l = 0; l < lay.convs.size(); ++l) {
    gw.emplace_back(tp.weight[l].size(), T(0));
    gb.emplace_back(tp.bias[l].size(), T(0));
  }
  tape.backward(g.out, std::move(seed), gw, gb);

  std::vector<ParamTensor> grads;
  for (std::size_t l = 0; l < lay.convs.size(); ++l) {
    const ConvSpec& s = lay.convs[l];
    grads.push_back({s.name + ".weight", weight_shape(s), std::vector<double>(gw[l].begin(), gw[l].end())});
    grads.push_back({s.name + ".bias", {s.out}, std::vector<double>(gb[l].begin(), gb[l].end())});
  }
  out.grads = Parameters(std::move(grads));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

std::vector<FeatureMap> color_encoder_forward(const ColorImage& img, const NetworkConfig& cfg, const Parameters& p) {
  cfg.validate();
  const int mult = 1 << cfg.levels;
  DEPTHSR_REQUIRE(img.height() % mult == 0 && img.width() % mult == 0,
                  "color image dimensions must be divisible by 2^levels = " + std::to_string(mult));
  const Layout lay = build_layout(cfg);
  const TypedParams<double> tp(lay, p);
  Tape<double> tape(lay, tp);
  const auto feats = build_color(tape, lay, tape.input(color_tensor<double>(img)));
  std::vector<FeatureMap> out;
  for (int f : feats) out.push_back(tape.value(f));
  return out;
}

std::vector<FeatureMap> depth_encoder_forward(const DepthMap& depth_up, const NetworkConfig& cfg,
                                              const Parameters& p) {
  cfg.validate();
  const int mult = 1 << cfg.levels;
  DEPTHSR_REQUIRE(depth_up.height() % mult == 0 && depth_up.width() % mult == 0,
                  "depth dimensions must be divisible by 2^levels = " + std::to_string(mult));
  const Layout lay = build_layout(cfg);
  const TypedParams<double> tp(lay, p);
  Tape<double> tape(lay, tp);
  const auto feats = build_depth(tape, lay, tape.input(plane_tensor<double>(depth_up.values)));
  std::vector<FeatureMap> out;
  for (int f : feats) out.push_back(tape.value(f));
  return out;
}

namespace {

void check_fusion_inputs(const FeatureMap& prev, const FeatureMap& color_feat, const FeatureMap& depth_feat,
                         const NetworkConfig& cfg, int step) {
  cfg.validate();
  DEPTHSR_REQUIRE(step >= 1 && step <= cfg.levels - 1, "fusion step index out of range");
  const bool same = prev.height() == color_feat.height() && prev.width() == color_feat.width() &&
                    prev.height() == depth_feat.height() && prev.width() == depth_feat.width();
  DEPTHSR_REQUIRE(same, "fusion_step inputs have different spatial dimensions");
}

}  // namespace

FeatureMap fusion_step(const FeatureMap& prev, const FeatureMap& color_feat, const FeatureMap& depth_feat,
                       const NetworkConfig& cfg, const Parameters& p, int step) {
  check_fusion_inputs(prev, color_feat, depth_feat, cfg, step);
  const Layout lay = build_layout(cfg);
  const TypedParams<double> tp(lay, p);
  Tape<double> tape(lay, tp);
  const int out = build_fusion_step(tape, lay, tape.input(prev), tape.input(color_feat), tape.input(depth_feat), step);
  return tape.value(out);
}

FusionStepGradients fusion_step_input_gradients(const FeatureMap& prev, const FeatureMap& color_feat,
                                                const FeatureMap& depth_feat, const NetworkConfig& cfg,
                                                const Parameters& p, int step, const FeatureMap& weights) {
  check_fusion_inputs(prev, color_feat, depth_feat, cfg, step);
  const Layout lay = build_layout(cfg);
  const TypedParams<double> tp(lay, p);
  Tape<double> tape(lay, tp);
  const int a = tape.input(prev, true);
  const int b = tape.input(color_feat, true);
  const int c = tape.input(depth_feat, true);
  const int out = build_fusion_step(tape, lay, a, b, c, step);
  DEPTHSR_REQUIRE(weights.same_shape(tape.value(out)), "fusion_step_input_gradients: weight shape mismatch");
  std::vector<std::vector<double>> gw;
  std::vector<std::vector<double>> gb;
  for (std::size_t l = 0; l < lay.convs.size(); ++l) {
    gw.emplace_back(tp.weight[l].size(), 0.0);
    gb.emplace_back(tp.bias[l].size(), 0.0);
  }
  FusionStepGradients res;
  res.value = tape.value(out);
  tape.backward(out, weights, gw, gb);
  auto grad_or_zero = [&](int node) {
    const auto& v = tape.value(node);
    return tape.grad(node).empty() ? FeatureMap(v.channels(), v.height(), v.width()) : tape.grad(node);
  };
  res.grad_prev = grad_or_zero(a);
  res.grad_color = grad_or_zero(b);
  res.grad_depth = grad_or_zero(c);
  return res;
}

ForwardTrace forward_trace(const DepthMap& lr_depth, const ColorImage& hr_color, const NetworkConfig& cfg,
                           const Parameters& p) {
  check_inputs(lr_depth, hr_color, cfg);
  const Layout lay = build_layout(cfg);
  const TypedParams<double> tp(lay, p);
  Tape<double> tape(lay, tp);
  const Plane up = bicubic_resample(lr_depth.values, hr_color.height(), hr_color.width());
  const Graph g = build_network(tape, lay, cfg, hr_color, up);
  return finish(up, output_plane(tape.value(g.out)), cfg.residual);
}

DepthMap forward(const DepthMap& lr_depth, const ColorImage& hr_color, const NetworkConfig& cfg, const Parameters& p,
                 Precision precision) {
  if (precision == Precision::Double) {
    return DepthMap(forward_trace(lr_depth, hr_color, cfg, p).prediction, lr_depth.unit_scale);
  }
  check_inputs(lr_depth, hr_color, cfg);
  const Layout lay = build_layout(cfg);
  const TypedParams<float> tp(lay, p);
  Tape<float> tape(lay, tp);
  const Plane up = bicubic_resample(lr_depth.values, hr_color.height(), hr_color.width());
  const Graph g = build_network(tape, lay, cfg, hr_color, up);
  return DepthMap(finish(up, output_plane(tape.value(g.out)), cfg.residual).prediction, lr_depth.unit_scale);
}

LossGradients loss_gradients(const SrSample& sample, const NetworkConfig& cfg, const Parameters& p,
                             const LossWeights& w, Precision precision) {
  if (precision == Precision::Single) return loss_gradients_impl<float>(sample, cfg, p, w);
  return loss_gradients_impl<double>(sample, cfg, p, w);
}

std::uint64_t branch_signature(const SrSample& sample, const NetworkConfig& cfg, const Parameters& p,
                               const LossWeights& w) {
  check_inputs(sample.lr_depth, sample.hr_color, cfg);
  const Layout lay = build_layout(cfg);
  const TypedParams<double> tp(lay, p);
  Tape<double> tape(lay, tp);
  const Plane up = bicubic_resample(sample.lr_depth.values, sample.hr_color.height(), sample.hr_color.width());
  const Graph g = build_network(tape, lay, cfg, sample.hr_color, up);
  const ForwardTrace tr = finish(up, output_plane(tape.value(g.out)), cfg.residual);
  Fnv1a h;
  tape.mix_signature(h);
  for (double v : tr.pre_clip.values()) h.mix(static_cast<std::uint8_t>(v < 0.0 ? 0 : (v > 1.0 ? 2 : 1)));
  const std::uint64_t loss_sig = loss_branch_signature(tr.prediction, sample.hr_depth_gt.values, w);
  h.mix_bytes(&loss_sig, sizeof loss_sig);
  return h.digest();
}

double loss_value(const SrSample& sample, const NetworkConfig& cfg, const Parameters& p, const LossWeights& w) {
  const ForwardTrace tr = forward_trace(sample.lr_depth, sample.hr_color, cfg, p);
  return total_loss(tr.prediction, sample.hr_depth_gt.values, w).total;
}

}  // namespace depthsr
