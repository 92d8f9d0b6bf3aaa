// SPDX-License-Identifier: Apache-2.0
#include "idn/nn.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstring>
#include <type_traits>
#include <vector>

#include "idn/parallel.hpp"

namespace idn {
namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

// y = w * c. The f64 path sums k strictly in order, so zero-padded weights
// reproduce a grouped product bit for bit.
template <class T>
void forward_product(const T* w, const T* c, T* y, std::size_t rows, std::size_t k,
                     std::size_t p) {
  if constexpr (std::is_same_v<T, double>) {
    std::fill(y, y + rows * p, 0.0);
    for (std::size_t o = 0; o < rows; ++o) {
      double* yo = y + o * p;
      for (std::size_t j = 0; j < k; ++j) {
        const double wj = w[o * k + j];
        const double* cj = c + j * p;
        for (std::size_t i = 0; i < p; ++i) yo[i] += wj * cj[i];
      }
    }
  } else {
    MatMap<T>(y, rows, p).noalias() = ConstMatMap<T>(w, rows, k) * ConstMatMap<T>(c, k, p);
  }
}

struct Geometry {
  std::size_t channels, height, width;
  std::size_t kernel_h, kernel_w, pad, stride;
  std::size_t out_h, out_w;
};

// Unfolds image patches into a (channels*kh*kw) x (out_h*out_w) matrix.
template <class T>
void im2col(const T* image, const Geometry& g, T* col) {
  const auto ph = static_cast<std::ptrdiff_t>(g.pad);
  const std::size_t cols = g.out_h * g.out_w;
  for (std::size_t c = 0; c < g.channels; ++c) {
    const T* plane = image + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
        T* row = col + ((c * g.kernel_h + ki) * g.kernel_w + kj) * cols;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - ph;
          T* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - ph;
            dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width))
                          ? T(0)
                          : src[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates columns back into the image.
template <class T>
void col2im(const T* col, const Geometry& g, T* image) {
  const auto ph = static_cast<std::ptrdiff_t>(g.pad);
  const std::size_t cols = g.out_h * g.out_w;
  for (std::size_t c = 0; c < g.channels; ++c) {
    T* plane = image + c * g.height * g.width;
    for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
        const T* row = col + ((c * g.kernel_h + ki) * g.kernel_w + kj) * cols;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - ph;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * g.width;
          const T* src = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - ph;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
            dst[static_cast<std::size_t>(ix)] += src[ox];
          }
        }
      }
    }
  }
}

template <class T>
void check_params(const ConvSpec& spec, const LayerParams<T>& params, const char* op) {
  if (params.weight.shape() != spec.weight_shape() || params.bias.shape() != spec.bias_shape()) {
    throw ShapeError(std::string(op) + ": parameter shapes " + params.weight.shape().str() + "/" +
                     params.bias.shape().str() + " do not match spec " +
                     spec.weight_shape().str() + "/" + spec.bias_shape().str());
  }
}

void check_input_channels(const Shape& shape, std::size_t expected, const char* op) {
  require_valid(shape, op);
  if (shape.c != expected) {
    throw ShapeError(std::string(op) + ": expected " + std::to_string(expected) +
                     " input channels, got " + std::to_string(shape.c));
  }
}

bool is_pointwise(const ConvSpec& spec) {
  return spec.kernel_h == 1 && spec.kernel_w == 1 && spec.stride == 1 && spec.pad == 0;
}

// Transposed-conv weights rearranged so that row (o*kh*kw + k) holds the
// cin_g coefficients mapping every input channel onto output tap (o, k).
template <class T>
std::vector<T> permute_for_scatter(const ConvSpec& spec, const BasicTensor<T>& weight,
                                   std::size_t group) {
  const std::size_t cin = spec.in_per_group();
  const std::size_t cout = spec.out_per_group();
  const std::size_t kk = spec.kernel_h * spec.kernel_w;
  std::vector<T> out(cout * kk * cin);
  for (std::size_t o = 0; o < cout; ++o) {
    const T* w = weight.raw() + (group * cout + o) * cin * kk;
    for (std::size_t i = 0; i < cin; ++i) {
      for (std::size_t k = 0; k < kk; ++k) out[(o * kk + k) * cin + i] = w[i * kk + k];
    }
  }
  return out;
}

template <class T>
void add_bias(BasicTensor<T>& out, const BasicTensor<T>& bias) {
  const std::size_t hw = out.shape().plane();
  for (std::size_t n = 0; n < out.n(); ++n) {
    for (std::size_t c = 0; c < out.c(); ++c) {
      T* p = out.plane(n, c);
      const T b = bias[c];
      for (std::size_t i = 0; i < hw; ++i) p[i] += b;
    }
  }
}

template <class T>
BasicTensor<T> bias_grad(const BasicTensor<T>& grad_out) {
  BasicTensor<T> out({1, grad_out.c(), 1, 1});
  const std::size_t hw = grad_out.shape().plane();
  for (std::size_t c = 0; c < grad_out.c(); ++c) {
    T acc = 0;
    for (std::size_t n = 0; n < grad_out.n(); ++n) {
      const T* p = grad_out.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) acc += p[i];
    }
    out[c] = acc;
  }
  return out;
}

// Sums per-sample weight-gradient partials in batch order.
template <class T>
BasicTensor<T> reduce_partials(const Shape& shape, const std::vector<std::vector<T>>& partials) {
  BasicTensor<T> out(shape);
  for (const auto& part : partials) {
    for (std::size_t i = 0; i < part.size(); ++i) out[i] += part[i];
  }
  return out;
}

}  // namespace

void ConvSpec::validate() const {
  if (in_channels == 0 || out_channels == 0 || kernel_h == 0 || kernel_w == 0 || stride == 0 ||
      groups == 0) {
    throw ConfigError("conv spec: channels, kernel, stride and groups must be positive");
  }
  if (in_channels % groups != 0 || out_channels % groups != 0) {
    throw ConfigError("conv spec: " + std::to_string(in_channels) + "->" +
                      std::to_string(out_channels) + " channels not divisible by " +
                      std::to_string(groups) + " groups");
  }
}

Shape ConvSpec::weight_shape() const {
  return {out_channels, in_channels / groups, kernel_h, kernel_w};
}

Shape ConvSpec::bias_shape() const { return {1, out_channels, 1, 1}; }

ConvSpec conv3x3(std::size_t in, std::size_t out, std::size_t groups) {
  return {in, out, 3, 3, 1, 1, groups};
}

ConvSpec conv1x1(std::size_t in, std::size_t out) { return {in, out, 1, 1, 1, 0, 1}; }

std::pair<std::size_t, std::size_t> conv_output_size(const ConvSpec& spec, std::size_t h,
                                                     std::size_t w) {
  const std::size_t ph = h + 2 * spec.pad;
  const std::size_t pw = w + 2 * spec.pad;
  if (ph < spec.kernel_h || pw < spec.kernel_w) {
    throw ShapeError("conv2d: padded input " + std::to_string(ph) + "x" + std::to_string(pw) +
                     " smaller than kernel");
  }
  if ((ph - spec.kernel_h) % spec.stride != 0 || (pw - spec.kernel_w) % spec.stride != 0) {
    throw ShapeError("conv2d: stride " + std::to_string(spec.stride) +
                     " does not tile the padded input");
  }
  return {(ph - spec.kernel_h) / spec.stride + 1, (pw - spec.kernel_w) / spec.stride + 1};
}

std::pair<std::size_t, std::size_t> transposed_output_size(const ConvSpec& spec, std::size_t h,
                                                           std::size_t w) {
  const auto full_h = static_cast<std::ptrdiff_t>(spec.stride * (h - 1) + spec.kernel_h);
  const auto full_w = static_cast<std::ptrdiff_t>(spec.stride * (w - 1) + spec.kernel_w);
  const auto oh = full_h - 2 * static_cast<std::ptrdiff_t>(spec.pad);
  const auto ow = full_w - 2 * static_cast<std::ptrdiff_t>(spec.pad);
  if (h == 0 || w == 0 || oh <= 0 || ow <= 0) {
    throw ShapeError("transposed_conv2d: non-positive output size");
  }
  return {static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)};
}

template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                      const LayerParams<T>& params) {
  spec.validate();
  check_input_channels(input.shape(), spec.in_channels, "conv2d");
  check_params(spec, params, "conv2d");
  const auto [oh, ow] = conv_output_size(spec, input.h(), input.w());
  BasicTensor<T> out({input.n(), spec.out_channels, oh, ow});

  const std::size_t cin = spec.in_per_group();
  const std::size_t cout = spec.out_per_group();
  const std::size_t k = cin * spec.kernel_h * spec.kernel_w;
  const std::size_t p = oh * ow;
  const bool pointwise = is_pointwise(spec);
  const Geometry geo{cin, input.h(), input.w(), spec.kernel_h, spec.kernel_w,
                     spec.pad, spec.stride, oh, ow};

  parallel_for(input.n(), [&](std::size_t n) {
    std::vector<T> col(pointwise ? 0 : k * p);
    for (std::size_t g = 0; g < spec.groups; ++g) {
      const T* x = input.plane(n, g * cin);
      const T* cols = x;
      if (!pointwise) {
        im2col(x, geo, col.data());
        cols = col.data();
      }
      forward_product(params.weight.raw() + g * cout * k, cols, out.plane(n, g * cout), cout, k, p);
    }
  });
  add_bias(out, params.bias);
  return out;
}

template <class T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const ConvSpec& spec,
                             const LayerParams<T>& params, const BasicTensor<T>& grad_out) {
  spec.validate();
  check_input_channels(input.shape(), spec.in_channels, "conv2d_backward");
  check_params(spec, params, "conv2d_backward");
  const auto [oh, ow] = conv_output_size(spec, input.h(), input.w());
  const Shape expected{input.n(), spec.out_channels, oh, ow};
  if (grad_out.shape() != expected) {
    throw ShapeError("conv2d_backward: grad shape " + grad_out.shape().str() + ", expected " +
                     expected.str());
  }

  const std::size_t cin = spec.in_per_group();
  const std::size_t cout = spec.out_per_group();
  const std::size_t k = cin * spec.kernel_h * spec.kernel_w;
  const std::size_t p = oh * ow;
  const bool pointwise = is_pointwise(spec);
  const Geometry geo{cin, input.h(), input.w(), spec.kernel_h, spec.kernel_w,
                     spec.pad, spec.stride, oh, ow};

  ConvGrads<T> grads;
  grads.input = BasicTensor<T>(input.shape());
  std::vector<std::vector<T>> partials(input.n(), std::vector<T>(params.weight.size()));

  parallel_for(input.n(), [&](std::size_t n) {
    std::vector<T> col(pointwise ? 0 : k * p);
    std::vector<T> dcol(pointwise ? 0 : k * p);
    for (std::size_t g = 0; g < spec.groups; ++g) {
      const T* x = input.plane(n, g * cin);
      const T* cols = x;
      if (!pointwise) {
        im2col(x, geo, col.data());
        cols = col.data();
      }
      ConstMatMap<T> w(params.weight.raw() + g * cout * k, cout, k);
      ConstMatMap<T> dy(grad_out.plane(n, g * cout), cout, p);
      ConstMatMap<T> c(cols, k, p);
      MatMap<T> dw(partials[n].data() + g * cout * k, cout, k);
      dw.noalias() = dy * c.transpose();
      if (pointwise) {
        MatMap<T> dx(grads.input.plane(n, g * cin), k, p);
        dx.noalias() = w.transpose() * dy;
      } else {
        MatMap<T> dc(dcol.data(), k, p);
        dc.noalias() = w.transpose() * dy;
        col2im(dcol.data(), geo, grads.input.plane(n, g * cin));
      }
    }
  });
  grads.weight = reduce_partials(params.weight.shape(), partials);
  grads.bias = bias_grad(grad_out);
  return grads;
}

template <class T>
BasicTensor<T> transposed_conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                                 const LayerParams<T>& params) {
  spec.validate();
  check_input_channels(input.shape(), spec.in_channels, "transposed_conv2d");
  check_params(spec, params, "transposed_conv2d");
  if (spec.kernel_h < spec.stride || spec.kernel_w < spec.stride) {
    throw ConfigError("transposed_conv2d: kernel must be at least the stride");
  }
  const auto [oh, ow] = transposed_output_size(spec, input.h(), input.w());
  BasicTensor<T> out({input.n(), spec.out_channels, oh, ow});

  const std::size_t cin = spec.in_per_group();
  const std::size_t cout = spec.out_per_group();
  const std::size_t kk = spec.kernel_h * spec.kernel_w;
  const std::size_t p = input.h() * input.w();
  // Scatter geometry: the output plays the role of the convolution's image.
  const Geometry geo{cout, oh, ow, spec.kernel_h, spec.kernel_w,
                     spec.pad, spec.stride, input.h(), input.w()};

  std::vector<std::vector<T>> permuted(spec.groups);
  for (std::size_t g = 0; g < spec.groups; ++g) {
    permuted[g] = permute_for_scatter(spec, params.weight, g);
  }

  parallel_for(input.n(), [&](std::size_t n) {
    std::vector<T> col(cout * kk * p);
    for (std::size_t g = 0; g < spec.groups; ++g) {
      ConstMatMap<T> w(permuted[g].data(), cout * kk, cin);
      ConstMatMap<T> x(input.plane(n, g * cin), cin, p);
      MatMap<T> c(col.data(), cout * kk, p);
      c.noalias() = w * x;
      col2im(col.data(), geo, out.plane(n, g * cout));
    }
  });
  add_bias(out, params.bias);
  return out;
}

template <class T>
ConvGrads<T> transposed_conv2d_backward(const BasicTensor<T>& input, const ConvSpec& spec,
                                        const LayerParams<T>& params,
                                        const BasicTensor<T>& grad_out) {
  spec.validate();
  check_input_channels(input.shape(), spec.in_channels, "transposed_conv2d_backward");
  check_params(spec, params, "transposed_conv2d_backward");
  const auto [oh, ow] = transposed_output_size(spec, input.h(), input.w());
  const Shape expected{input.n(), spec.out_channels, oh, ow};
  if (grad_out.shape() != expected) {
    throw ShapeError("transposed_conv2d_backward: grad shape " + grad_out.shape().str() +
                     ", expected " + expected.str());
  }

  const std::size_t cin = spec.in_per_group();
  const std::size_t cout = spec.out_per_group();
  const std::size_t kk = spec.kernel_h * spec.kernel_w;
  const std::size_t p = input.h() * input.w();
  const Geometry geo{cout, oh, ow, spec.kernel_h, spec.kernel_w,
                     spec.pad, spec.stride, input.h(), input.w()};

  std::vector<std::vector<T>> permuted(spec.groups);
  for (std::size_t g = 0; g < spec.groups; ++g) {
    permuted[g] = permute_for_scatter(spec, params.weight, g);
  }

  ConvGrads<T> grads;
  grads.input = BasicTensor<T>(input.shape());
  std::vector<std::vector<T>> partials(input.n(), std::vector<T>(params.weight.size()));

  parallel_for(input.n(), [&](std::size_t n) {
    std::vector<T> dcol(cout * kk * p);
    std::vector<T> dperm(cout * kk * cin);
    for (std::size_t g = 0; g < spec.groups; ++g) {
      im2col(grad_out.plane(n, g * cout), geo, dcol.data());
      ConstMatMap<T> w(permuted[g].data(), cout * kk, cin);
      ConstMatMap<T> dc(dcol.data(), cout * kk, p);
      ConstMatMap<T> x(input.plane(n, g * cin), cin, p);
      MatMap<T> dx(grads.input.plane(n, g * cin), cin, p);
      dx.noalias() = w.transpose() * dc;
      MatMap<T> dw(dperm.data(), cout * kk, cin);
      dw.noalias() = dc * x.transpose();
      T* dst = partials[n].data();
      for (std::size_t o = 0; o < cout; ++o) {
        T* wrow = dst + (g * cout + o) * cin * kk;
        for (std::size_t i = 0; i < cin; ++i) {
          for (std::size_t k = 0; k < kk; ++k) wrow[i * kk + k] = dperm[(o * kk + k) * cin + i];
        }
      }
    }
  });
  grads.weight = reduce_partials(params.weight.shape(), partials);
  grads.bias = bias_grad(grad_out);
  return grads;
}

template <class T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& input, T slope) {
  if (!(slope >= T(0) && slope < T(1))) throw UsageError("leaky_relu: slope must be in [0,1)");
  BasicTensor<T> out = input;
  for (T& v : out.data()) v = v >= T(0) ? v : slope * v;
  return out;
}

template <class T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& input, T slope,
                                   const BasicTensor<T>& grad_out) {
  if (input.shape() != grad_out.shape()) {
    throw ShapeError("leaky_relu_backward: shape mismatch");
  }
  BasicTensor<T> out = grad_out;
  auto x = input.data();
  auto g = out.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (x[i] < T(0)) g[i] *= slope;
  }
  return out;
}

template <class T>
std::pair<BasicTensor<T>, BasicTensor<T>> channel_split(const BasicTensor<T>& input,
                                                        std::size_t leading) {
  require_valid(input.shape(), "channel_split");
  if (leading == 0 || leading >= input.c()) {
    throw ShapeError("channel_split: cannot split " + std::to_string(input.c()) +
                     " channels at " + std::to_string(leading));
  }
  const std::size_t rest = input.c() - leading;
  BasicTensor<T> first({input.n(), leading, input.h(), input.w()});
  BasicTensor<T> second({input.n(), rest, input.h(), input.w()});
  const std::size_t hw = input.shape().plane();
  for (std::size_t n = 0; n < input.n(); ++n) {
    std::memcpy(first.plane(n, 0), input.plane(n, 0), leading * hw * sizeof(T));
    std::memcpy(second.plane(n, 0), input.plane(n, leading), rest * hw * sizeof(T));
  }
  return {std::move(first), std::move(second)};
}

template <class T>
std::pair<BasicTensor<T>, BasicTensor<T>> channel_slice(const BasicTensor<T>& input,
                                                        std::size_t divisor) {
  require_valid(input.shape(), "channel_slice");
  if (divisor < 2 || input.c() % divisor != 0) {
    throw ShapeError("channel_slice: " + std::to_string(input.c()) +
                     " channels not divisible by " + std::to_string(divisor));
  }
  return channel_split(input, input.c() / divisor);
}

template <class T>
BasicTensor<T> channel_concat(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_valid(a.shape(), "channel_concat");
  require_valid(b.shape(), "channel_concat");
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
    throw ShapeError("channel_concat: " + a.shape().str() + " vs " + b.shape().str());
  }
  BasicTensor<T> out({a.n(), a.c() + b.c(), a.h(), a.w()});
  const std::size_t hw = a.shape().plane();
  for (std::size_t n = 0; n < a.n(); ++n) {
    std::memcpy(out.plane(n, 0), a.plane(n, 0), a.c() * hw * sizeof(T));
    std::memcpy(out.plane(n, a.c()), b.plane(n, 0), b.c() * hw * sizeof(T));
  }
  return out;
}

template <class T>
BasicTensor<T> crop(const BasicTensor<T>& input, std::size_t top, std::size_t left,
                    std::size_t h, std::size_t w) {
  require_valid(input.shape(), "crop");
  if (h == 0 || w == 0 || top + h > input.h() || left + w > input.w()) {
    throw ShapeError("crop: window exceeds " + input.shape().str());
  }
  BasicTensor<T> out({input.n(), input.c(), h, w});
  for (std::size_t n = 0; n < input.n(); ++n) {
    for (std::size_t c = 0; c < input.c(); ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        const T* src = input.plane(n, c) + (top + y) * input.w() + left;
        std::copy(src, src + w, out.plane(n, c) + y * w);
      }
    }
  }
  return out;
}

template <class T>
BasicTensor<T> crop_backward(const Shape& full, std::size_t top, std::size_t left,
                             const BasicTensor<T>& grad) {
  if (grad.n() != full.n || grad.c() != full.c || top + grad.h() > full.h ||
      left + grad.w() > full.w) {
    throw ShapeError("crop_backward: window exceeds " + full.str());
  }
  BasicTensor<T> out(full);
  for (std::size_t n = 0; n < full.n; ++n) {
    for (std::size_t c = 0; c < full.c; ++c) {
      for (std::size_t y = 0; y < grad.h(); ++y) {
        const T* src = grad.plane(n, c) + y * grad.w();
        std::copy(src, src + grad.w(), out.plane(n, c) + (top + y) * full.w + left);
      }
    }
  }
  return out;
}

#define IDN_INSTANTIATE(T)                                                                     \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const ConvSpec&, const LayerParams<T>&); \
  template ConvGrads<T> conv2d_backward(const BasicTensor<T>&, const ConvSpec&,               \
                                        const LayerParams<T>&, const BasicTensor<T>&);        \
  template BasicTensor<T> transposed_conv2d(const BasicTensor<T>&, const ConvSpec&,           \
                                            const LayerParams<T>&);                           \
  template ConvGrads<T> transposed_conv2d_backward(const BasicTensor<T>&, const ConvSpec&,    \
                                                   const LayerParams<T>&,                     \
                                                   const BasicTensor<T>&);                    \
  template BasicTensor<T> leaky_relu(const BasicTensor<T>&, T);                               \
  template BasicTensor<T> leaky_relu_backward(const BasicTensor<T>&, T, const BasicTensor<T>&); \
  template std::pair<BasicTensor<T>, BasicTensor<T>> channel_split(const BasicTensor<T>&,     \
                                                                   std::size_t);              \
  template std::pair<BasicTensor<T>, BasicTensor<T>> channel_slice(const BasicTensor<T>&,     \
                                                                   std::size_t);              \
  template BasicTensor<T> channel_concat(const BasicTensor<T>&, const BasicTensor<T>&);       \
  template BasicTensor<T> crop(const BasicTensor<T>&, std::size_t, std::size_t, std::size_t,  \
                               std::size_t);                                                  \
  template BasicTensor<T> crop_backward(const Shape&, std::size_t, std::size_t,               \
                                        const BasicTensor<T>&);

IDN_INSTANTIATE(float)
IDN_INSTANTIATE(double)
#undef IDN_INSTANTIATE

}  // namespace idn
