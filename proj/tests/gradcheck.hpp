// SPDX-License-Identifier: Apache-2.0
// Central finite-difference checks for tape gradients (64-bit).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "idn/model.hpp"
#include "idn/tape.hpp"
#include "oracles.hpp"

namespace idn::testing {

inline constexpr double kFdEpsilon = 1e-5;
// Gradients smaller than this are compared absolutely.
inline constexpr double kFdFloor = 1e-6;
// Floor used for whole-network checks.
inline constexpr double kFdNetworkFloor = 1e-5;

struct GradCheckResult {
  double max_rel = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

inline void note(GradCheckResult& r, const std::string& what, const TensorD& analytic,
                 const TensorD& numeric, double floor = kFdFloor) {
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i];
    const double n = numeric[i];
    const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    ++r.checked;
    if (err > r.max_rel) {
      r.max_rel = err;
      char buf[96];
      std::snprintf(buf, sizeof buf, "[%zu] analytic %.6e numeric %.6e", i, a, n);
      r.worst = what + buf;
    }
  }
}

using GraphBuilder = std::function<Var(Tape<double>&, const std::vector<Var>&)>;

/// Loss = <output, r> for a fixed random r; every leaf is a tape input.
inline GradCheckResult check_graph(std::vector<TensorD> leaves, const GraphBuilder& build,
                                   std::uint64_t seed) {
  Tape<double> tape;
  std::vector<Var> vars;
  for (const auto& l : leaves) vars.push_back(tape.input(l));
  const Var out = build(tape, vars);
  const TensorD r = random_tensor<double>(tape.value(out).shape(), seed);
  const Gradients<double> grads = tape.backward(out, r);

  auto loss = [&] {
    Tape<double> t;
    std::vector<Var> v;
    for (const auto& l : leaves) v.push_back(t.input(l));
    return dot(t.value(build(t, v)), r);
  };
  GradCheckResult result;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const TensorD numeric = numeric_gradient(leaves[i], loss, kFdEpsilon);
    note(result, "leaf" + std::to_string(i), grads.wrt(vars[i]), numeric);
  }
  return result;
}

/// Full-network check over every parameter tensor and the input.
inline GradCheckResult check_idn(const IdnConfig& config, ModelParams<double> params, TensorD x,
                                 Mode mode, std::uint64_t seed) {
  Tape<double> tape;
  const Var xv = tape.input(x);
  const Var out = idn_forward(tape, xv, params, config, mode);
  const TensorD r = random_tensor<double>(tape.value(out).shape(), seed);
  const Gradients<double> grads = tape.backward(out, r);

  auto loss = [&] { return dot(idn_forward(x, params, config, mode), r); };
  GradCheckResult result;
  params.for_each_tensor([&](const std::string& name, TensorD& t) {
    note(result, name, grads.param(name), numeric_gradient(t, loss, kFdEpsilon),
         kFdNetworkFloor);
  });
  note(result, "input", grads.wrt(xv), numeric_gradient(x, loss, kFdEpsilon), kFdNetworkFloor);
  return result;
}

}  // namespace idn::testing
