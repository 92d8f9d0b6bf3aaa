// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <utility>

#include "idn/tensor.hpp"

namespace idn {

/// Geometry of a (possibly grouped) 2-D convolution. The same spec drives
/// transposed convolution, where `stride` is the upsampling factor.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::size_t groups = 1;

  /// Throws ConfigError on zero extents or channels not divisible by groups.
  void validate() const;

  /// (out_channels, in_channels / groups, kernel_h, kernel_w)
  Shape weight_shape() const;
  /// (1, out_channels, 1, 1)
  Shape bias_shape() const;

  std::size_t in_per_group() const { return in_channels / groups; }
  std::size_t out_per_group() const { return out_channels / groups; }

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

/// 3x3, stride 1, pad 1 convolution: keeps the spatial size.
ConvSpec conv3x3(std::size_t in, std::size_t out, std::size_t groups = 1);
/// 1x1 pointwise convolution.
ConvSpec conv1x1(std::size_t in, std::size_t out);

template <class T>
struct LayerParams {
  BasicTensor<T> weight;
  BasicTensor<T> bias;

  static LayerParams zeros(const ConvSpec& spec) {
    return {BasicTensor<T>(spec.weight_shape()), BasicTensor<T>(spec.bias_shape())};
  }

  std::size_t numel() const { return weight.size() + bias.size(); }

  template <class U>
  LayerParams<U> cast() const {
    return {weight.template cast<U>(), bias.template cast<U>()};
  }

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Output (h, w) of a forward convolution; throws ShapeError when the window
/// does not fit or the stride does not tile the padded input exactly.
std::pair<std::size_t, std::size_t> conv_output_size(const ConvSpec& spec, std::size_t h,
                                                     std::size_t w);

/// Output (h, w) of a transposed convolution: stride*(h-1) + kernel - 2*pad.
std::pair<std::size_t, std::size_t> transposed_output_size(const ConvSpec& spec, std::size_t h,
                                                           std::size_t w);

template <class T>
struct ConvGrads {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  BasicTensor<T> bias;
};

/// Cross-correlation with zero padding; group g reads input channels
/// [g*in/groups, (g+1)*in/groups) and writes the matching output slice.
template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                      const LayerParams<T>& params);

template <class T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const ConvSpec& spec,
                             const LayerParams<T>& params, const BasicTensor<T>& grad_out);

/// Adjoint of the strided convolution (scatter-accumulate) plus bias.
/// Weight layout is (out_channels, in_channels / groups, kh, kw).
template <class T>
BasicTensor<T> transposed_conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                                 const LayerParams<T>& params);

template <class T>
ConvGrads<T> transposed_conv2d_backward(const BasicTensor<T>& input, const ConvSpec& spec,
                                        const LayerParams<T>& params,
                                        const BasicTensor<T>& grad_out);

template <class T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& input, T slope);

/// Gradient through leaky_relu; the derivative at 0 is taken as 1.
template <class T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& input, T slope,
                                   const BasicTensor<T>& grad_out);

/// Splits off the first `leading` channels.
template <class T>
std::pair<BasicTensor<T>, BasicTensor<T>> channel_split(const BasicTensor<T>& input,
                                                        std::size_t leading);

/// Slice with fraction 1/divisor: the first part holds the leading
/// c/divisor channels, the second part the rest.
template <class T>
std::pair<BasicTensor<T>, BasicTensor<T>> channel_slice(const BasicTensor<T>& input,
                                                        std::size_t divisor);

/// Concatenates along channels, `a` first.
template <class T>
BasicTensor<T> channel_concat(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Spatial crop of an (h, w) window starting at (top, left).
template <class T>
BasicTensor<T> crop(const BasicTensor<T>& input, std::size_t top, std::size_t left,
                    std::size_t h, std::size_t w);

/// Adjoint of crop: embeds grad into a zero tensor of `full` shape.
template <class T>
BasicTensor<T> crop_backward(const Shape& full, std::size_t top, std::size_t left,
                             const BasicTensor<T>& grad);

}  // namespace idn
