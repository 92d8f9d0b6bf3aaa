// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "idn/nn.hpp"
#include "idn/tape.hpp"
#include "idn/tensor.hpp"

namespace idn {

/// Architecture hyperparameters. Defaults build the 31-layer, 4-block
/// network (D3 = 64, d = 16, s = 4, grouped convs with 4 groups).
struct IdnConfig {
  std::size_t scale = 3;
  std::size_t num_dblocks = 4;
  std::size_t d3 = 64;
  std::size_t d = 16;
  std::size_t s = 4;
  std::size_t groups = 4;
  float lrelu_slope = 0.05f;
  std::size_t rblock_kernel = 17;
  std::size_t feat_channels = 64;

  // Enhancement-unit widths: the upper branch narrows by d per layer, the
  // lower branch widens by d, and the lower branch starts at D3.
  std::size_t d1() const { return d3 - d; }
  std::size_t d2() const { return d3 - 2 * d; }
  std::size_t d4() const { return d3; }
  std::size_t d5() const { return d3 - d; }
  std::size_t d6() const { return d3 + d; }
  /// Channels kept on the short path (the leading D3/s of the upper output).
  std::size_t retained() const { return d3 / s; }

  /// Throws ConfigError if any structural invariant fails.
  void validate() const;

  /// 2 FBlock convs + 7 per DBlock + 1 RBlock.
  std::size_t weighted_layers() const { return 2 + 7 * num_dblocks + 1; }

  /// Leading border trimmed from an m*l label to reach m*l - m + 1.
  std::size_t label_lead() const { return (scale - 1) / 2; }

  friend bool operator==(const IdnConfig&, const IdnConfig&) = default;
};

/// A small configuration used by tests and gradient checks.
IdnConfig tiny_config(std::size_t scale = 2);

enum class Mode { Train, Infer };

/// "train" / "infer"; anything else is a UsageError.
Mode parse_mode(std::string_view text);

struct LayerSpec {
  std::string name;
  ConvSpec spec;
  bool transposed = false;
};

/// Weighted layers in canonical (checkpoint) order.
std::vector<LayerSpec> layer_specs(const IdnConfig& config);

std::string fblock_name(int index);
std::string enhancement_name(std::size_t block, int conv);
std::string compression_name(std::size_t block);
inline constexpr const char* kRBlockName = "rblock";

template <class T>
struct NamedLayer {
  LayerSpec layout;
  LayerParams<T> params;
};

/// Named layer parameters; the names are the checkpoint contract.
template <class T>
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(const IdnConfig& config);  // zero-filled

  const LayerParams<T>& at(std::string_view name) const;
  LayerParams<T>& at(std::string_view name);
  bool contains(std::string_view name) const;

  std::vector<NamedLayer<T>>& layers() { return layers_; }
  const std::vector<NamedLayer<T>>& layers() const { return layers_; }
  std::size_t layer_count() const { return layers_.size(); }

  /// Visits every tensor as ("<layer>.weight" | "<layer>.bias", tensor).
  void for_each_tensor(const std::function<void(const std::string&, BasicTensor<T>&)>& fn);
  void for_each_tensor(
      const std::function<void(const std::string&, const BasicTensor<T>&)>& fn) const;

  template <class U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    for (const auto& l : layers_) {
      out.layers().push_back(NamedLayer<U>{l.layout, l.params.template cast<U>()});
    }
    return out;
  }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
      if (a.layers_[i].layout.name != b.layers_[i].layout.name ||
          !(a.layers_[i].params == b.layers_[i].params)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<NamedLayer<T>> layers_;
};

/// He-normal weights (variance 2 / fan_in, fan_in = in/groups * kh * kw),
/// zero biases; deterministic in `seed`.
template <class T>
ModelParams<T> init_params(const IdnConfig& config, std::uint64_t seed);

/// Total scalar count, weights plus biases.
template <class T>
std::size_t count_params(const ModelParams<T>& params);

/// Activations recorded by idn_forward for analysis.
template <class T>
struct FeatureCapture {
  std::vector<BasicTensor<T>> enhancement;  // P^k, one per block
  std::vector<BasicTensor<T>> compression;  // B_k, one per block
};

/// Two 3x3 convs, each followed by LReLU: 1 -> feat -> feat channels.
template <class T>
BasicTensor<T> fblock_forward(const BasicTensor<T>& x, const ModelParams<T>& params,
                              const IdnConfig& config);

/// Enhancement unit of block `block` (1-based); returns D6 channels.
template <class T>
BasicTensor<T> enhancement_forward(const BasicTensor<T>& b_prev, const ModelParams<T>& params,
                                   const IdnConfig& config, std::size_t block);

/// 1x1 compression D6 -> feat followed by LReLU.
template <class T>
BasicTensor<T> compression_forward(const BasicTensor<T>& p, const ModelParams<T>& params,
                                   const IdnConfig& config, std::size_t block);

/// Full network: RBlock(B_n) + bicubic(x). Train mode returns
/// (m*h - m + 1) per side with a matching crop of the bicubic skip; infer
/// mode returns exactly (m*h, m*w).
template <class T>
BasicTensor<T> idn_forward(const BasicTensor<T>& x, const ModelParams<T>& params,
                           const IdnConfig& config, Mode mode,
                           FeatureCapture<T>* capture = nullptr);

/// Same graph recorded on a tape. Parameters are registered under their
/// tensor names ("<layer>.weight", "<layer>.bias").
template <class T>
Var idn_forward(Tape<T>& tape, Var x, const ModelParams<T>& params, const IdnConfig& config,
                Mode mode);

/// Output side length of idn_forward for an LR side length.
std::size_t output_size(const IdnConfig& config, std::size_t lr_size, Mode mode);

}  // namespace idn
