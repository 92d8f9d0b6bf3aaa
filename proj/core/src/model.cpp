// SPDX-License-Identifier: Apache-2.0
#include "idn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "idn/imaging.hpp"

namespace idn {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("idn config: " + message);
}

// Executes the network eagerly on tensors.
template <class T>
class EagerExec {
 public:
  using Value = BasicTensor<T>;

  EagerExec(const ModelParams<T>& params, FeatureCapture<T>* capture)
      : params_(params), capture_(capture) {}

  Value conv(const Value& x, const ConvSpec& spec, const std::string& layer) {
    return idn::conv2d(x, spec, params_.at(layer));
  }
  Value tconv(const Value& x, const ConvSpec& spec, const std::string& layer) {
    return idn::transposed_conv2d(x, spec, params_.at(layer));
  }
  Value lrelu(const Value& x, T slope) { return idn::leaky_relu(x, slope); }
  std::pair<Value, Value> slice(const Value& x, std::size_t s) { return idn::channel_slice(x, s); }
  Value concat(const Value& a, const Value& b) { return idn::channel_concat(a, b); }
  Value add(const Value& a, const Value& b) { return idn::add(a, b); }
  Value crop(const Value& x, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
    return idn::crop(x, top, left, h, w);
  }
  Value upscale(const Value& x, std::size_t oh, std::size_t ow) {
    Value out({x.n(), x.c(), oh, ow});
    const auto rows = bicubic_weights(x.h(), oh, true);
    const auto cols = bicubic_weights(x.w(), ow, true);
    for (std::size_t n = 0; n < x.n(); ++n) {
      for (std::size_t c = 0; c < x.c(); ++c) {
        resize_plane<T>(std::span<const T>(x.plane(n, c), x.shape().plane()), x.h(), x.w(), rows,
                        cols, std::span<T>(out.plane(n, c), oh * ow));
      }
    }
    for (T& v : out.data()) v = std::clamp(v, T(0), T(1));
    return out;
  }
  const Shape& shape(const Value& x) const { return x.shape(); }
  void capture_enhancement(const Value& v) {
    if (capture_) capture_->enhancement.push_back(v);
  }
  void capture_compression(const Value& v) {
    if (capture_) capture_->compression.push_back(v);
  }

 private:
  const ModelParams<T>& params_;
  FeatureCapture<T>* capture_;
};

// Records the network on a tape.
template <class T>
class TapeExec {
 public:
  using Value = Var;

  TapeExec(Tape<T>& tape, const ModelParams<T>& params) : tape_(tape), params_(params) {}

  Value conv(Value x, const ConvSpec& spec, const std::string& layer) {
    auto [w, b] = register_layer(layer);
    return tape_.conv2d(x, spec, w, b);
  }
  Value tconv(Value x, const ConvSpec& spec, const std::string& layer) {
    auto [w, b] = register_layer(layer);
    return tape_.transposed_conv2d(x, spec, w, b);
  }
  Value lrelu(Value x, T slope) { return tape_.leaky_relu(x, slope); }
  std::pair<Value, Value> slice(Value x, std::size_t s) { return tape_.channel_slice(x, s); }
  Value concat(Value a, Value b) { return tape_.channel_concat(a, b); }
  Value add(Value a, Value b) { return tape_.add(a, b); }
  Value crop(Value x, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
    return tape_.crop(x, top, left, h, w);
  }
  Value upscale(Value x, std::size_t oh, std::size_t ow) {
    return tape_.resize(x, oh, ow, true, true);
  }
  const Shape& shape(Value x) const { return tape_.value(x).shape(); }
  void capture_enhancement(Value) {}
  void capture_compression(Value) {}

 private:
  std::pair<Var, Var> register_layer(const std::string& layer) {
    const auto& p = params_.at(layer);
    return {tape_.parameter(layer + ".weight", p.weight), tape_.parameter(layer + ".bias", p.bias)};
  }

  Tape<T>& tape_;
  const ModelParams<T>& params_;
};

template <class Exec, class T>
typename Exec::Value run_fblock(Exec& ex, typename Exec::Value x, const IdnConfig& cfg,
                                const std::vector<LayerSpec>& specs) {
  const T slope = static_cast<T>(cfg.lrelu_slope);
  if (ex.shape(x).c != 1) {
    throw ShapeError("fblock: expected a single-channel input, got " + ex.shape(x).str());
  }
  auto h = ex.lrelu(ex.conv(x, specs[0].spec, specs[0].name), slope);
  return ex.lrelu(ex.conv(h, specs[1].spec, specs[1].name), slope);
}

// specs index of block k (1-based) conv j (1..6), or 7 for compression.
std::size_t block_layer(std::size_t block, int j) { return 2 + (block - 1) * 7 + (j - 1); }

template <class Exec, class T>
typename Exec::Value run_enhancement(Exec& ex, typename Exec::Value b_prev, const IdnConfig& cfg,
                                     const std::vector<LayerSpec>& specs, std::size_t block) {
  const T slope = static_cast<T>(cfg.lrelu_slope);
  if (ex.shape(b_prev).c != cfg.feat_channels) {
    throw ShapeError("enhancement unit: expected " + std::to_string(cfg.feat_channels) +
                     " channels, got " + std::to_string(ex.shape(b_prev).c));
  }
  auto layer = [&](int j) -> const LayerSpec& { return specs[block_layer(block, j)]; };
  auto step = [&](typename Exec::Value v, int j) {
    return ex.lrelu(ex.conv(v, layer(j).spec, layer(j).name), slope);
  };
  auto p1 = step(step(step(b_prev, 1), 2), 3);
  auto [kept, rest] = ex.slice(p1, cfg.s);
  auto r = ex.concat(kept, b_prev);
  auto p2 = step(step(step(rest, 4), 5), 6);
  return ex.add(p2, r);
}

template <class Exec, class T>
typename Exec::Value run_compression(Exec& ex, typename Exec::Value p, const IdnConfig& cfg,
                                     const std::vector<LayerSpec>& specs, std::size_t block) {
  const T slope = static_cast<T>(cfg.lrelu_slope);
  const auto& layer = specs[block_layer(block, 7)];
  if (ex.shape(p).c != cfg.d6()) {
    throw ShapeError("compression unit: expected " + std::to_string(cfg.d6()) +
                     " channels, got " + std::to_string(ex.shape(p).c));
  }
  return ex.lrelu(ex.conv(p, layer.spec, layer.name), slope);
}

template <class Exec, class T>
typename Exec::Value run_idn(Exec& ex, typename Exec::Value x, const IdnConfig& cfg,
                             Mode mode) {
  cfg.validate();
  const auto specs = layer_specs(cfg);
  const Shape in = ex.shape(x);
  if (in.c != 1) throw ShapeError("idn_forward: expected a single-channel input, got " + in.str());

  auto b = run_fblock<Exec, T>(ex, x, cfg, specs);
  for (std::size_t k = 1; k <= cfg.num_dblocks; ++k) {
    auto p = run_enhancement<Exec, T>(ex, b, cfg, specs, k);
    ex.capture_enhancement(p);
    b = run_compression<Exec, T>(ex, p, cfg, specs, k);
    ex.capture_compression(b);
  }

  const std::size_t m = cfg.scale;
  const std::size_t lead = cfg.label_lead();
  const LayerSpec& rb = specs.back();
  typename Exec::Value residual;
  typename Exec::Value skip;
  if (mode == Mode::Train) {
    // Padded so the output is m*h - m + 1, aligned with the trimmed label.
    residual = ex.tconv(b, rb.spec, rb.name);
    const std::size_t oh = m * in.h - m + 1;
    const std::size_t ow = m * in.w - m + 1;
    skip = ex.crop(ex.upscale(x, m * in.h, m * in.w), lead, lead, oh, ow);
  } else {
    // Same phase as training: full scatter, then the m*h window whose first
    // pixel sits `lead` pixels before the training output's first pixel.
    ConvSpec full = rb.spec;
    full.pad = 0;
    const std::size_t start = rb.spec.pad - lead;
    residual = ex.crop(ex.tconv(b, full, rb.name), start, start, m * in.h, m * in.w);
    skip = ex.upscale(x, m * in.h, m * in.w);
  }
  return ex.add(residual, skip);
}

}  // namespace

void IdnConfig::validate() const {
  require(scale >= 2 && scale <= 4, "scale must be 2, 3 or 4");
  require(num_dblocks >= 1, "num_dblocks must be >= 1");
  require(feat_channels >= 1, "feat_channels must be >= 1");
  require(s >= 2, "slice divisor s must be >= 2");
  require(d3 % s == 0, "D3 must be divisible by s");
  require(d3 > 2 * d, "D3 - 2d must be >= 1");
  require(groups >= 1, "groups must be >= 1");
  require(retained() + feat_channels == d6(),
          "D3/s + feat_channels (" + std::to_string(retained() + feat_channels) +
              ") must equal D6 (" + std::to_string(d6()) + ")");
  require(d1() % groups == 0 && d2() % groups == 0 && (d3 - retained()) % groups == 0 &&
              d4() % groups == 0,
          "D1, D2, D3*(1-1/s) and D4 must be divisible by groups");
  require(lrelu_slope >= 0.0f && lrelu_slope < 1.0f, "lrelu_slope must be in [0,1)");
  require(rblock_kernel % 2 == 1, "rblock_kernel must be odd");
  require(rblock_kernel >= scale, "rblock_kernel must be >= scale");
  require(scale - label_lead() <= (rblock_kernel + 1) / 2,
          "rblock_kernel too small for exact inference geometry");
}

IdnConfig tiny_config(std::size_t scale) {
  IdnConfig c;
  c.scale = scale;
  c.num_dblocks = 1;
  c.d3 = 8;
  c.d = 2;
  c.s = 4;
  c.groups = 2;
  c.feat_channels = 8;
  return c;
}

Mode parse_mode(std::string_view text) {
  if (text == "train") return Mode::Train;
  if (text == "infer") return Mode::Infer;
  throw UsageError("unknown mode '" + std::string(text) + "' (expected train or infer)");
}

std::string fblock_name(int index) { return "fblock.conv" + std::to_string(index); }

std::string enhancement_name(std::size_t block, int conv) {
  return "dblock[" + std::to_string(block) + "].enh.conv" + std::to_string(conv);
}

std::string compression_name(std::size_t block) {
  return "dblock[" + std::to_string(block) + "].comp";
}

std::vector<LayerSpec> layer_specs(const IdnConfig& c) {
  c.validate();
  std::vector<LayerSpec> out;
  out.reserve(c.weighted_layers());
  out.push_back({fblock_name(1), conv3x3(1, c.feat_channels)});
  out.push_back({fblock_name(2), conv3x3(c.feat_channels, c.feat_channels)});
  for (std::size_t k = 1; k <= c.num_dblocks; ++k) {
    out.push_back({enhancement_name(k, 1), conv3x3(c.feat_channels, c.d1())});
    out.push_back({enhancement_name(k, 2), conv3x3(c.d1(), c.d2(), c.groups)});
    out.push_back({enhancement_name(k, 3), conv3x3(c.d2(), c.d3)});
    out.push_back({enhancement_name(k, 4), conv3x3(c.d3 - c.retained(), c.d4(), c.groups)});
    out.push_back({enhancement_name(k, 5), conv3x3(c.d4(), c.d5())});
    out.push_back({enhancement_name(k, 6), conv3x3(c.d5(), c.d6())});
    out.push_back({compression_name(k), conv1x1(c.d6(), c.feat_channels)});
  }
  const std::size_t k = c.rblock_kernel;
  out.push_back({kRBlockName, ConvSpec{c.feat_channels, 1, k, k, c.scale, (k - 1) / 2, 1}, true});
  return out;
}

std::size_t output_size(const IdnConfig& config, std::size_t lr_size, Mode mode) {
  return mode == Mode::Train ? config.scale * lr_size - config.scale + 1 : config.scale * lr_size;
}

template <class T>
ModelParams<T>::ModelParams(const IdnConfig& config) {
  for (auto& spec : layer_specs(config)) {
    auto zeros = LayerParams<T>::zeros(spec.spec);
    layers_.push_back(NamedLayer<T>{std::move(spec), std::move(zeros)});
  }
}

template <class T>
const LayerParams<T>& ModelParams<T>::at(std::string_view name) const {
  for (const auto& l : layers_) {
    if (l.layout.name == name) return l.params;
  }
  throw StateError("model params: no layer named " + std::string(name));
}

template <class T>
LayerParams<T>& ModelParams<T>::at(std::string_view name) {
  return const_cast<LayerParams<T>&>(std::as_const(*this).at(name));
}

template <class T>
bool ModelParams<T>::contains(std::string_view name) const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [&](const auto& l) { return l.layout.name == name; });
}

template <class T>
void ModelParams<T>::for_each_tensor(
    const std::function<void(const std::string&, BasicTensor<T>&)>& fn) {
  for (auto& l : layers_) {
    fn(l.layout.name + ".weight", l.params.weight);
    fn(l.layout.name + ".bias", l.params.bias);
  }
}

template <class T>
void ModelParams<T>::for_each_tensor(
    const std::function<void(const std::string&, const BasicTensor<T>&)>& fn) const {
  for (const auto& l : layers_) {
    fn(l.layout.name + ".weight", l.params.weight);
    fn(l.layout.name + ".bias", l.params.bias);
  }
}

template <class T>
ModelParams<T> init_params(const IdnConfig& config, std::uint64_t seed) {
  ModelParams<T> params(config);
  std::mt19937_64 rng(seed);
  for (auto& layer : params.layers()) {
    const auto& spec = layer.layout.spec;
    const double fan_in = static_cast<double>(spec.in_per_group() * spec.kernel_h * spec.kernel_w);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (T& v : layer.params.weight.data()) v = static_cast<T>(dist(rng));
  }
  return params;
}

template <class T>
std::size_t count_params(const ModelParams<T>& params) {
  std::size_t total = 0;
  for (const auto& l : params.layers()) total += l.params.numel();
  return total;
}

template <class T>
BasicTensor<T> fblock_forward(const BasicTensor<T>& x, const ModelParams<T>& params,
                              const IdnConfig& config) {
  EagerExec<T> ex(params, nullptr);
  return run_fblock<EagerExec<T>, T>(ex, x, config, layer_specs(config));
}

template <class T>
BasicTensor<T> enhancement_forward(const BasicTensor<T>& b_prev, const ModelParams<T>& params,
                                   const IdnConfig& config, std::size_t block) {
  if (block < 1 || block > config.num_dblocks) throw UsageError("enhancement: block out of range");
  EagerExec<T> ex(params, nullptr);
  return run_enhancement<EagerExec<T>, T>(ex, b_prev, config, layer_specs(config), block);
}

template <class T>
BasicTensor<T> compression_forward(const BasicTensor<T>& p, const ModelParams<T>& params,
                                   const IdnConfig& config, std::size_t block) {
  if (block < 1 || block > config.num_dblocks) throw UsageError("compression: block out of range");
  EagerExec<T> ex(params, nullptr);
  return run_compression<EagerExec<T>, T>(ex, p, config, layer_specs(config), block);
}

template <class T>
BasicTensor<T> idn_forward(const BasicTensor<T>& x, const ModelParams<T>& params,
                           const IdnConfig& config, Mode mode, FeatureCapture<T>* capture) {
  EagerExec<T> ex(params, capture);
  return run_idn<EagerExec<T>, T>(ex, x, config, mode);
}

template <class T>
Var idn_forward(Tape<T>& tape, Var x, const ModelParams<T>& params, const IdnConfig& config,
                Mode mode) {
  TapeExec<T> ex(tape, params);
  return run_idn<TapeExec<T>, T>(ex, x, config, mode);
}

#define IDN_INSTANTIATE(T)                                                                      \
  template class ModelParams<T>;                                                                \
  template ModelParams<T> init_params<T>(const IdnConfig&, std::uint64_t);                      \
  template std::size_t count_params(const ModelParams<T>&);                                     \
  template BasicTensor<T> fblock_forward(const BasicTensor<T>&, const ModelParams<T>&,          \
                                         const IdnConfig&);                                     \
  template BasicTensor<T> enhancement_forward(const BasicTensor<T>&, const ModelParams<T>&,     \
                                              const IdnConfig&, std::size_t);                   \
  template BasicTensor<T> compression_forward(const BasicTensor<T>&, const ModelParams<T>&,     \
                                              const IdnConfig&, std::size_t);                   \
  template BasicTensor<T> idn_forward(const BasicTensor<T>&, const ModelParams<T>&,             \
                                      const IdnConfig&, Mode, FeatureCapture<T>*);              \
  template Var idn_forward(Tape<T>&, Var, const ModelParams<T>&, const IdnConfig&, Mode);

IDN_INSTANTIATE(float)
IDN_INSTANTIATE(double)
#undef IDN_INSTANTIATE

}  // namespace idn
