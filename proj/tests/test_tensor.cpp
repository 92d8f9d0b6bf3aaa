// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "idn/tensor.hpp"
#include "oracles.hpp"

using namespace idn;
using idn::testing::random_tensor;

TEST(Tensor, CreateZeroFill) {
  const Tensor t = create<float>({1, 1, 2, 2}, 0.0f);
  EXPECT_EQ(t.shape(), (Shape{1, 1, 2, 2}));
  for (float v : t.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Tensor, CreateFromValues) {
  const Tensor t = create<float>({1, 2, 1, 1}, std::vector<float>{3, 5});
  EXPECT_EQ(t(0, 0, 0, 0), 3.0f);
  EXPECT_EQ(t(0, 1, 0, 0), 5.0f);
}

TEST(Tensor, CreateLengthMismatchThrows) {
  EXPECT_THROW(create<float>({1, 1, 2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
}

TEST(Tensor, ZeroExtentRejected) {
  EXPECT_THROW(Tensor({1, 0, 2, 2}), ShapeError);
}

TEST(Tensor, WriteReadRoundTrip) {
  Tensor t({2, 3, 4, 5});
  float v = 0.25f;
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t h = 0; h < 4; ++h)
        for (std::size_t w = 0; w < 5; ++w) t(n, c, h, w) = (v += 1.125f);
  v = 0.25f;
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t h = 0; h < 4; ++h)
        for (std::size_t w = 0; w < 5; ++w) EXPECT_EQ(t(n, c, h, w), v += 1.125f);
  // w is the fastest-moving index
  EXPECT_EQ(t.offset(0, 0, 0, 1), 1u);
  EXPECT_EQ(t.offset(0, 0, 1, 0), 5u);
  EXPECT_EQ(t.offset(0, 1, 0, 0), 20u);
}

TEST(Tensor, AddIdentityAndHandSum) {
  const Tensor ones({1, 1, 2, 2}, 1.0f);
  const Tensor zeros({1, 1, 2, 2}, 0.0f);
  EXPECT_EQ(add(ones, zeros), ones);
  const Tensor a({1, 1, 1, 2}, std::vector<float>{1, 2});
  const Tensor b({1, 1, 1, 2}, std::vector<float>{3, 4});
  EXPECT_EQ(add(a, b), Tensor({1, 1, 1, 2}, std::vector<float>{4, 6}));
}

TEST(Tensor, AddShapeMismatchThrows) {
  EXPECT_THROW(add(Tensor({1, 80, 8, 8}), Tensor({1, 64, 8, 8})), ShapeError);
  Tensor a({1, 2, 2, 2});
  EXPECT_THROW(add_inplace(a, Tensor({1, 2, 2, 1})), ShapeError);
}

TEST(Tensor, AddCommutativeAssociative) {
  const auto a = random_tensor<float>({2, 3, 4, 4}, 1);
  const auto b = random_tensor<float>({2, 3, 4, 4}, 2);
  const auto c = random_tensor<float>({2, 3, 4, 4}, 3);
  EXPECT_EQ(add(a, b), add(b, a));
  EXPECT_LT(idn::testing::max_rel_error(add(add(a, b), c), add(a, add(b, c)), 1e-3), 1e-5);
}

TEST(Tensor, ChannelMeanOfTwoPlanes) {
  Tensor t({1, 2, 3, 3});
  for (std::size_t i = 0; i < 9; ++i) {
    t[i] = 1.0f;
    t[9 + i] = 3.0f;
  }
  const Tensor m = channel_mean(t);
  EXPECT_EQ(m.shape(), (Shape{1, 1, 3, 3}));
  for (float v : m.data()) EXPECT_EQ(v, 2.0f);
}

TEST(Tensor, ChannelMeanSingleChannelIsIdentity) {
  const auto t = random_tensor<float>({2, 1, 5, 4}, 9);
  EXPECT_EQ(channel_mean(t), t);
}

TEST(Tensor, ChannelMeanMatchesLoopOracle) {
  const auto t = random_tensor<float>({1, 64, 4, 4}, 4);
  const Tensor m = channel_mean(t);
  for (std::size_t h = 0; h < 4; ++h)
    for (std::size_t w = 0; w < 4; ++w) {
      float acc = 0.0f;
      for (std::size_t c = 0; c < 64; ++c) acc += t(0, c, h, w);
      EXPECT_NEAR(m(0, 0, h, w), acc / 64.0f, 1e-6f);
    }
}

TEST(Tensor, ChannelMeanIsLinear) {
  const auto a = random_tensor<double>({2, 7, 3, 3}, 5);
  const auto b = random_tensor<double>({2, 7, 3, 3}, 6);
  const double alpha = 2.75;
  TensorD combo(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) combo[i] = alpha * a[i] + b[i];
  const TensorD lhs = channel_mean(combo);
  const TensorD ma = channel_mean(a);
  const TensorD mb = channel_mean(b);
  TensorD rhs(lhs.shape());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = alpha * ma[i] + mb[i];
  EXPECT_LT(idn::testing::max_rel_error(lhs, rhs, 1e-9), 1e-12);

  const Tensor af = a.cast<float>();
  const Tensor bf = b.cast<float>();
  Tensor combof(af.shape());
  for (std::size_t i = 0; i < af.size(); ++i) combof[i] = 2.75f * af[i] + bf[i];
  const Tensor lf = channel_mean(combof);
  const Tensor maf = channel_mean(af);
  const Tensor mbf = channel_mean(bf);
  Tensor rf(lf.shape());
  for (std::size_t i = 0; i < rf.size(); ++i) rf[i] = 2.75f * maf[i] + mbf[i];
  EXPECT_LT(idn::testing::max_rel_error(lf, rf, 1e-2), 1e-6);
}

TEST(Tensor, SumUsesAllElements) {
  const Tensor t({1, 2, 2, 2}, 0.5f);
  EXPECT_EQ(sum(t), 4.0f);
}
