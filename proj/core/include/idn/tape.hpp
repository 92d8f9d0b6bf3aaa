// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "idn/imaging.hpp"
#include "idn/nn.hpp"
#include "idn/tensor.hpp"

namespace idn {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;
  bool valid() const { return id != npos; }
};

template <class T>
struct Gradients {
  /// d loss / d parameter, keyed by the name given to Tape::parameter().
  std::map<std::string, BasicTensor<T>> params;
  /// d loss / d input for every Tape::input() leaf, keyed by node id.
  std::map<std::size_t, BasicTensor<T>> inputs;

  const BasicTensor<T>& wrt(Var v) const;
  const BasicTensor<T>& param(const std::string& name) const;
};

/// Reverse-mode recorder for the operations the network uses. Every op
/// evaluates eagerly and appends one node; backward() walks the nodes in
/// exact reverse order and accumulates gradients where values fan out.
template <class T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  /// Differentiable leaf (e.g. the network input).
  Var input(BasicTensor<T> value);
  /// Non-differentiable leaf.
  Var constant(BasicTensor<T> value);
  /// Trainable leaf; gradients are reported under `name`.
  Var parameter(std::string name, BasicTensor<T> value);

  Var conv2d(Var x, const ConvSpec& spec, Var weight, Var bias);
  Var transposed_conv2d(Var x, const ConvSpec& spec, Var weight, Var bias);
  Var leaky_relu(Var x, T slope);
  std::pair<Var, Var> channel_slice(Var x, std::size_t divisor);
  Var channel_concat(Var a, Var b);
  Var add(Var a, Var b);
  Var crop(Var x, std::size_t top, std::size_t left, std::size_t h, std::size_t w);
  /// Per-plane bicubic resize (see bicubic_weights); with `clamp` the
  /// output is limited to [0,1] and clamped sites pass no gradient.
  Var resize(Var x, std::size_t out_h, std::size_t out_w, bool antialias, bool clamp);

  const BasicTensor<T>& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  void clear();

  /// Propagates `loss_grad` (shaped like `output`) back through the tape.
  /// Throws StateError when nothing was recorded or `output` is unknown.
  Gradients<T> backward(Var output, const BasicTensor<T>& loss_grad);

  /// Node ids in the order the last backward() visited them.
  const std::vector<std::size_t>& visit_log() const { return visit_log_; }

 private:
  using Grads = std::vector<BasicTensor<T>>;
  using BackwardFn = std::function<void(const Tape&, Grads&, std::size_t self)>;

  enum class Kind { Input, Constant, Parameter, Op };

  struct Node {
    Kind kind = Kind::Op;
    std::string name;
    BasicTensor<T> value;
    BackwardFn backward;
  };

  Var push(Kind kind, BasicTensor<T> value, BackwardFn backward = {}, std::string name = {});
  const Node& node(Var v) const;
  static void accumulate(Grads& grads, std::size_t id, BasicTensor<T> g);

  std::vector<Node> nodes_;
  std::vector<std::size_t> visit_log_;
};

}  // namespace idn
