// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <numeric>

#include "gradcheck.hpp"
#include "idn/tape.hpp"

using namespace idn;
using idn::testing::check_graph;
using idn::testing::random_tensor;

namespace {

constexpr double kTol = 1e-4;

void expect_gradients(const idn::testing::GradCheckResult& r) {
  EXPECT_GT(r.checked, 0u);
  EXPECT_LT(r.max_rel, kTol) << r.worst;
}

std::vector<TensorD> conv_leaves(const ConvSpec& spec, Shape x, std::uint64_t seed) {
  return {random_tensor<double>(x, seed), random_tensor<double>(spec.weight_shape(), seed + 1),
          random_tensor<double>(spec.bias_shape(), seed + 2)};
}

}  // namespace

TEST(Tape, BackwardBeforeForwardIsStateError) {
  Tape<double> tape;
  EXPECT_THROW(tape.backward(Var{0}, TensorD({1, 1, 1, 1})), StateError);
}

TEST(Tape, LossGradShapeMustMatch) {
  Tape<double> tape;
  const Var x = tape.input(TensorD({1, 1, 2, 2}, 1.0));
  const Var y = tape.leaky_relu(x, 0.05);
  EXPECT_THROW(tape.backward(y, TensorD({1, 1, 2, 1})), ShapeError);
}

TEST(Tape, VisitsEveryNodeInReverseOrder) {
  Tape<double> tape;
  const ConvSpec spec = conv3x3(2, 4);
  const Var x = tape.input(random_tensor<double>({1, 2, 4, 4}, 1));
  const Var w = tape.parameter("w", random_tensor<double>(spec.weight_shape(), 2));
  const Var b = tape.parameter("b", random_tensor<double>(spec.bias_shape(), 3));
  const Var h = tape.leaky_relu(tape.conv2d(x, spec, w, b), 0.05);
  const auto [lead, rest] = tape.channel_slice(h, 4);
  const Var y = tape.channel_concat(rest, lead);
  tape.backward(y, TensorD(tape.value(y).shape(), 1.0));
  std::vector<std::size_t> expected(tape.size());
  std::iota(expected.rbegin(), expected.rend(), 0);
  EXPECT_EQ(tape.visit_log(), expected);
}

TEST(Tape, FanOutAccumulates) {
  // y = x + x  =>  dy/dx = 2
  Tape<double> tape;
  const Var x = tape.input(TensorD({1, 1, 2, 2}, 0.3));
  const Var y = tape.add(x, x);
  const auto g = tape.backward(y, TensorD({1, 1, 2, 2}, 1.0));
  for (double v : g.wrt(x).data()) EXPECT_DOUBLE_EQ(v, 2.0);
}

TEST(Tape, SliceConcatRouteToDisjointChannels) {
  Tape<double> tape;
  const Var x = tape.input(random_tensor<double>({1, 8, 3, 3}, 5));
  const auto [lead, rest] = tape.channel_slice(x, 4);
  const Var z = tape.channel_concat(lead, tape.input(TensorD({1, 3, 3, 3})));
  TensorD g(tape.value(z).shape(), 1.0);
  const auto grads = tape.backward(z, g);
  const TensorD& gx = grads.wrt(x);
  for (std::size_t c = 0; c < 8; ++c)
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(gx.plane(0, c)[i], c < 2 ? 1.0 : 0.0);
  (void)rest;
}

TEST(Tape, SharedParameterNameAccumulates) {
  Tape<double> tape;
  const Var a = tape.parameter("p", TensorD({1, 1, 1, 2}, 1.0));
  const Var b = tape.parameter("p", TensorD({1, 1, 1, 2}, 1.0));
  const Var y = tape.add(a, b);
  const auto g = tape.backward(y, TensorD({1, 1, 1, 2}, 3.0));
  for (double v : g.param("p").data()) EXPECT_DOUBLE_EQ(v, 6.0);
}

TEST(GradientCheck, Conv2dDense) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ConvSpec spec = conv3x3(3, 4);
    expect_gradients(check_graph(conv_leaves(spec, {2, 3, 5, 6}, seed * 10),
                                 [&](Tape<double>& t, const std::vector<Var>& v) {
                                   return t.conv2d(v[0], spec, v[1], v[2]);
                                 },
                                 seed));
  }
}

TEST(GradientCheck, Conv2dGroupedStridedAndPointwise) {
  const ConvSpec specs[] = {conv3x3(8, 4, 4), ConvSpec{4, 6, 3, 3, 2, 1, 2}, conv1x1(5, 3)};
  for (const auto& spec : specs) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      expect_gradients(check_graph(conv_leaves(spec, {2, spec.in_channels, 7, 7}, seed * 7),
                                   [&](Tape<double>& t, const std::vector<Var>& v) {
                                     return t.conv2d(v[0], spec, v[1], v[2]);
                                   },
                                   seed));
    }
  }
}

TEST(GradientCheck, TransposedConv) {
  for (std::size_t m = 2; m <= 4; ++m) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const ConvSpec spec{3, 1, 17, 17, m, 8, 1};
      expect_gradients(check_graph(conv_leaves(spec, {2, 3, 3, 4}, seed * 3 + m),
                                   [&](Tape<double>& t, const std::vector<Var>& v) {
                                     return t.transposed_conv2d(v[0], spec, v[1], v[2]);
                                   },
                                   seed));
    }
  }
}

TEST(GradientCheck, LeakyRelu) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    // keep samples away from the kink so the central difference is smooth
    TensorD x = random_tensor<double>({2, 3, 4, 4}, seed);
    for (double& v : x.data()) v += v >= 0 ? 0.01 : -0.01;
    expect_gradients(check_graph({x},
                                 [](Tape<double>& t, const std::vector<Var>& v) {
                                   return t.leaky_relu(v[0], 0.05);
                                 },
                                 seed));
  }
}

TEST(GradientCheck, SliceConcatAddCrop) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    expect_gradients(check_graph(
        {random_tensor<double>({2, 8, 5, 5}, seed), random_tensor<double>({2, 6, 5, 5}, seed + 9)},
        [](Tape<double>& t, const std::vector<Var>& v) {
          const auto [lead, rest] = t.channel_slice(v[0], 4);
          const Var r = t.channel_concat(lead, v[1]);
          const Var p = t.add(r, t.channel_concat(rest, lead));
          return t.crop(p, 1, 0, 3, 4);
        },
        seed));
  }
}

TEST(GradientCheck, BicubicResize) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    expect_gradients(check_graph({random_tensor<double>({1, 2, 5, 6}, seed, 0.2, 0.8)},
                                 [](Tape<double>& t, const std::vector<Var>& v) {
                                   return t.resize(v[0], 12, 9, true, false);
                                 },
                                 seed));
    expect_gradients(check_graph({random_tensor<double>({1, 1, 9, 9}, seed, 0.2, 0.8)},
                                 [](Tape<double>& t, const std::vector<Var>& v) {
                                   return t.resize(v[0], 4, 5, true, true);
                                 },
                                 seed));
  }
}
