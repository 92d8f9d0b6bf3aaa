// SPDX-License-Identifier: Apache-2.0
#include "idn/tape.hpp"

#include <algorithm>

namespace idn {

template <class T>
const BasicTensor<T>& Gradients<T>::wrt(Var v) const {
  auto it = inputs.find(v.id);
  if (it == inputs.end()) throw StateError("gradients: no input gradient for node");
  return it->second;
}

template <class T>
const BasicTensor<T>& Gradients<T>::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw StateError("gradients: unknown parameter " + name);
  return it->second;
}

template <class T>
Var Tape<T>::push(Kind kind, BasicTensor<T> value, BackwardFn backward, std::string name) {
  nodes_.push_back(Node{kind, std::move(name), std::move(value), std::move(backward)});
  return Var{nodes_.size() - 1};
}

template <class T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw StateError("tape: unknown variable");
  return nodes_[v.id];
}

template <class T>
void Tape<T>::accumulate(Grads& grads, std::size_t id, BasicTensor<T> g) {
  if (grads[id].empty()) {
    grads[id] = std::move(g);
  } else {
    add_inplace(grads[id], g);
  }
}

template <class T>
const BasicTensor<T>& Tape<T>::value(Var v) const {
  return node(v).value;
}

template <class T>
void Tape<T>::clear() {
  nodes_.clear();
  visit_log_.clear();
}

template <class T>
Var Tape<T>::input(BasicTensor<T> value) {
  return push(Kind::Input, std::move(value));
}

template <class T>
Var Tape<T>::constant(BasicTensor<T> value) {
  return push(Kind::Constant, std::move(value));
}

template <class T>
Var Tape<T>::parameter(std::string name, BasicTensor<T> value) {
  return push(Kind::Parameter, std::move(value), {}, std::move(name));
}

template <class T>
Var Tape<T>::conv2d(Var x, const ConvSpec& spec, Var weight, Var bias) {
  const LayerParams<T> params{value(weight), value(bias)};
  auto out = idn::conv2d(value(x), spec, params);
  return push(Kind::Op, std::move(out), [x, spec, weight, bias](const Tape& t, Grads& g, std::size_t self) {
    const LayerParams<T> p{t.value(weight), t.value(bias)};
    auto grads = conv2d_backward(t.value(x), spec, p, g[self]);
    accumulate(g, x.id, std::move(grads.input));
    accumulate(g, weight.id, std::move(grads.weight));
    accumulate(g, bias.id, std::move(grads.bias));
  });
}

template <class T>
Var Tape<T>::transposed_conv2d(Var x, const ConvSpec& spec, Var weight, Var bias) {
  const LayerParams<T> params{value(weight), value(bias)};
  auto out = idn::transposed_conv2d(value(x), spec, params);
  return push(Kind::Op, std::move(out), [x, spec, weight, bias](const Tape& t, Grads& g, std::size_t self) {
    const LayerParams<T> p{t.value(weight), t.value(bias)};
    auto grads = transposed_conv2d_backward(t.value(x), spec, p, g[self]);
    accumulate(g, x.id, std::move(grads.input));
    accumulate(g, weight.id, std::move(grads.weight));
    accumulate(g, bias.id, std::move(grads.bias));
  });
}

template <class T>
Var Tape<T>::leaky_relu(Var x, T slope) {
  auto out = idn::leaky_relu(value(x), slope);
  return push(Kind::Op, std::move(out), [x, slope](const Tape& t, Grads& g, std::size_t self) {
    accumulate(g, x.id, leaky_relu_backward(t.value(x), slope, g[self]));
  });
}

template <class T>
std::pair<Var, Var> Tape<T>::channel_slice(Var x, std::size_t divisor) {
  auto [first, second] = idn::channel_slice(value(x), divisor);
  const Shape full = value(x).shape();
  const std::size_t lead = first.c();
  // Each part routes its gradient into its own channel range of x.
  Var a = push(Kind::Op, std::move(first), [x, full, lead](const Tape&, Grads& g, std::size_t self) {
    auto expanded = crop_backward(Shape{full.n, lead, full.h, full.w}, 0, 0, g[self]);
    BasicTensor<T> rest({full.n, full.c - lead, full.h, full.w});
    accumulate(g, x.id, idn::channel_concat(expanded, rest));
  });
  Var b = push(Kind::Op, std::move(second), [x, full, lead](const Tape&, Grads& g, std::size_t self) {
    BasicTensor<T> head({full.n, lead, full.h, full.w});
    accumulate(g, x.id, idn::channel_concat(head, g[self]));
  });
  return {a, b};
}

template <class T>
Var Tape<T>::channel_concat(Var a, Var b) {
  auto out = idn::channel_concat(value(a), value(b));
  const std::size_t lead = value(a).c();
  return push(Kind::Op, std::move(out), [a, b, lead](const Tape&, Grads& g, std::size_t self) {
    auto [ga, gb] = channel_split(g[self], lead);
    accumulate(g, a.id, std::move(ga));
    accumulate(g, b.id, std::move(gb));
  });
}

template <class T>
Var Tape<T>::add(Var a, Var b) {
  auto out = idn::add(value(a), value(b));
  return push(Kind::Op, std::move(out), [a, b](const Tape&, Grads& g, std::size_t self) {
    accumulate(g, a.id, g[self]);
    accumulate(g, b.id, g[self]);
  });
}

template <class T>
Var Tape<T>::crop(Var x, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
  auto out = idn::crop(value(x), top, left, h, w);
  const Shape full = value(x).shape();
  return push(Kind::Op, std::move(out), [x, full, top, left](const Tape&, Grads& g, std::size_t self) {
    accumulate(g, x.id, crop_backward(full, top, left, g[self]));
  });
}

template <class T>
Var Tape<T>::resize(Var x, std::size_t out_h, std::size_t out_w, bool antialias, bool clamp) {
  const auto& in = value(x);
  require_valid(in.shape(), "resize");
  if (out_h == 0 || out_w == 0) throw UsageError("resize: output size must be >= 1");
  auto rows = std::make_shared<ResizeWeights>(bicubic_weights(in.h(), out_h, antialias));
  auto cols = std::make_shared<ResizeWeights>(bicubic_weights(in.w(), out_w, antialias));
  BasicTensor<T> out({in.n(), in.c(), out_h, out_w});
  for (std::size_t n = 0; n < in.n(); ++n) {
    for (std::size_t c = 0; c < in.c(); ++c) {
      resize_plane<T>(std::span<const T>(in.plane(n, c), in.shape().plane()), in.h(), in.w(),
                      *rows, *cols, std::span<T>(out.plane(n, c), out_h * out_w));
    }
  }
  // Sites where the clamp was active carry no gradient.
  auto active = std::make_shared<std::vector<bool>>(out.size(), true);
  if (clamp) {
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i] < T(0) || data[i] > T(1)) {
        (*active)[i] = false;
        data[i] = std::clamp(data[i], T(0), T(1));
      }
    }
  }
  const Shape in_shape = in.shape();
  return push(Kind::Op, std::move(out),
              [x, rows, cols, active, in_shape](const Tape&, Grads& g, std::size_t self) {
                BasicTensor<T> masked = g[self];
                auto md = masked.data();
                for (std::size_t i = 0; i < md.size(); ++i) {
                  if (!(*active)[i]) md[i] = T(0);
                }
                BasicTensor<T> gin(in_shape);
                const std::size_t plane_out = masked.shape().plane();
                for (std::size_t n = 0; n < in_shape.n; ++n) {
                  for (std::size_t c = 0; c < in_shape.c; ++c) {
                    resize_plane_adjoint<T>(
                        std::span<const T>(masked.plane(n, c), plane_out), *rows, *cols,
                        std::span<T>(gin.plane(n, c), in_shape.plane()));
                  }
                }
                accumulate(g, x.id, std::move(gin));
              });
}

template <class T>
Gradients<T> Tape<T>::backward(Var output, const BasicTensor<T>& loss_grad) {
  if (nodes_.empty()) throw StateError("backward: nothing has been recorded on the tape");
  const Node& out = node(output);
  if (loss_grad.shape() != out.value.shape()) {
    throw ShapeError("backward: loss gradient " + loss_grad.shape().str() +
                     " does not match output " + out.value.shape().str());
  }
  Grads grads(nodes_.size());
  grads[output.id] = loss_grad;
  visit_log_.clear();
  visit_log_.reserve(nodes_.size());

  Gradients<T> result;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    visit_log_.push_back(i);
    Node& nd = nodes_[i];
    switch (nd.kind) {
      case Kind::Op:
        if (!grads[i].empty() && nd.backward) nd.backward(*this, grads, i);
        break;
      case Kind::Parameter: {
        BasicTensor<T> g = grads[i].empty() ? BasicTensor<T>(nd.value.shape()) : std::move(grads[i]);
        auto it = result.params.find(nd.name);
        if (it == result.params.end()) {
          result.params.emplace(nd.name, std::move(g));
        } else {
          add_inplace(it->second, g);
        }
        break;
      }
      case Kind::Input:
        result.inputs.emplace(
            i, grads[i].empty() ? BasicTensor<T>(nd.value.shape()) : std::move(grads[i]));
        break;
      case Kind::Constant:
        break;
    }
    // Release intermediate gradients once consumed.
    if (nd.kind == Kind::Op) grads[i] = BasicTensor<T>();
  }
  return result;
}

template struct Gradients<float>;
template struct Gradients<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace idn
