// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "fixtures.hpp"
#include "idn/imaging.hpp"

using namespace idn;
using idn::testing::data_path;
using idn::testing::TempDir;

namespace {

ImageRGB random_image(std::size_t h, std::size_t w, std::size_t ch, std::uint64_t seed) {
  ImageRGB img(h, w, ch);
  std::mt19937_64 rng(seed);
  for (auto& s : img.samples) s = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

ImagePlane random_plane(std::size_t h, std::size_t w, std::uint64_t seed, float lo = 0.0f,
                        float hi = 1.0f) {
  ImagePlane p(h, w, PlaneTag::Y);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  for (float& v : p.samples) v = u(rng);
  return p;
}

// Keys' cubic with a = -0.5.
double cubic(double x) {
  x = std::abs(x);
  if (x <= 1) return 1.5 * x * x * x - 2.5 * x * x + 1;
  if (x < 2) return -0.5 * x * x * x + 2.5 * x * x - 4 * x + 2;
  return 0;
}

std::map<std::size_t, double> row_of(const ResizeWeights& rw, std::size_t o) {
  std::map<std::size_t, double> m;
  for (std::size_t t = rw.offsets[o]; t < rw.offsets[o + 1]; ++t) m[rw.index[t]] += rw.weight[t];
  return m;
}

}  // namespace

TEST(Png, RoundTripRgbAndGray) {
  TempDir dir;
  const ImageRGB rgb = random_image(13, 17, 3, 1);
  save_png(dir / "rgb.png", rgb);
  EXPECT_EQ(load_png(dir / "rgb.png"), rgb);
  const ImageRGB gray = random_image(9, 4, 1, 2);
  save_png(dir / "gray.png", gray);
  EXPECT_EQ(load_png(dir / "gray.png"), gray);
}

TEST(Png, PlaneSavesAsSingleChannel) {
  TempDir dir;
  ImagePlane p(3, 2, PlaneTag::Gray);
  p.samples = {0.0f, 1.0f, 0.5f, 0.25f, 2.0f, -1.0f};
  save_png(dir / "p.png", p);
  const ImageRGB back = load_png(dir / "p.png");
  EXPECT_EQ(back.channels, 1u);
  EXPECT_EQ(back.samples, (std::vector<std::uint8_t>{0, 255, 128, 64, 255, 0}));
}

TEST(Png, Errors) {
  TempDir dir;
  EXPECT_THROW(load_png(data_path("invalid/gray16.png")), IoError);
  EXPECT_THROW(load_png(dir / "missing.png"), IoError);
  idn::testing::write_bytes(dir / "fake.png", "not a png at all");
  EXPECT_THROW(load_png(dir / "fake.png"), IoError);
}

TEST(Png, FixturesLoad) {
  const ImageRGB a = load_png(data_path("chelsea_crop.png"));
  EXPECT_EQ(a.height, 96u);
  EXPECT_EQ(a.channels, 3u);
  EXPECT_TRUE(load_png(data_path("camera_gray.png")).is_gray());
}

TEST(YCbCr, Endpoints) {
  ImageRGB img(1, 2, 3);
  img.samples = {255, 255, 255, 0, 0, 0};
  const YCbCrPlanes p = rgb_to_ycbcr(img);
  EXPECT_NEAR(p.y.samples[0], 235.0 / 255.0, 1e-6);
  EXPECT_NEAR(p.y.samples[1], 16.0 / 255.0, 1e-6);
  EXPECT_NEAR(p.cb.samples[1], 128.0 / 255.0, 1e-6);
  EXPECT_NEAR(p.cr.samples[1], 128.0 / 255.0, 1e-6);
  EXPECT_NEAR(p.cb.samples[0], 128.0 / 255.0, 1e-5);
}

TEST(YCbCr, MatchesDirectFormula) {
  const ImageRGB img = random_image(5, 5, 3, 3);
  const YCbCrPlanes p = rgb_to_ycbcr(img);
  for (std::size_t i = 0; i < 25; ++i) {
    const double r = img.samples[3 * i] / 255.0, g = img.samples[3 * i + 1] / 255.0,
                 b = img.samples[3 * i + 2] / 255.0;
    EXPECT_NEAR(p.y.samples[i], (16 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0, 1e-6);
    EXPECT_NEAR(p.cb.samples[i], (128 - 37.797 * r - 74.203 * g + 112.0 * b) / 255.0, 1e-6);
    EXPECT_NEAR(p.cr.samples[i], (128 + 112.0 * r - 93.786 * g - 18.214 * b) / 255.0, 1e-6);
  }
}

TEST(YCbCr, RoundTripWithinOneLevel) {
  const ImageRGB img = random_image(32, 32, 3, 4);
  const ImageRGB back = ycbcr_to_rgb(rgb_to_ycbcr(img));
  for (std::size_t i = 0; i < img.samples.size(); ++i)
    EXPECT_LE(std::abs(int(img.samples[i]) - int(back.samples[i])), 1);
}

TEST(YCbCr, GrayBypass) {
  const ImageRGB g = random_image(4, 4, 1, 5);
  const ImagePlane y = luminance(g);
  EXPECT_EQ(y.tag, PlaneTag::Gray);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_FLOAT_EQ(y.samples[i], g.samples[i] / 255.0f);
  EXPECT_EQ(plane_to_gray(y), g);
}

TEST(Bicubic, WeightRowsSumToOne) {
  for (std::size_t in : {5u, 12u, 33u})
    for (std::size_t out : {3u, 7u, 24u, 66u, 99u})
      for (bool aa : {true, false}) {
        const ResizeWeights rw = bicubic_weights(in, out, aa);
        for (std::size_t o = 0; o < out; ++o) {
          double s = 0;
          for (auto [i, w] : row_of(rw, o)) {
            EXPECT_LT(i, in);
            s += w;
          }
          EXPECT_NEAR(s, 1.0, 1e-9);
        }
      }
}

TEST(Bicubic, HandComputedWeights) {
  // x2 up, output 4: src = 4.5 / 2 - 0.5 = 1.75
  const auto up = row_of(bicubic_weights(4, 8, true), 4);
  ASSERT_EQ(up.size(), 4u);
  EXPECT_NEAR(up.at(0), -0.0234375, 1e-15);
  EXPECT_NEAR(up.at(1), 0.2265625, 1e-15);
  EXPECT_NEAR(up.at(2), 0.8671875, 1e-15);
  EXPECT_NEAR(up.at(3), -0.0703125, 1e-15);
  EXPECT_NEAR(up.at(2), cubic(0.25), 1e-15);

  // x1/2 antialiased, output 3: src = 6.5, kernel stretched by 2 over taps 3..10
  const auto down = row_of(bicubic_weights(16, 8, true), 3);
  ASSERT_EQ(down.size(), 8u);
  const double expect[8] = {-0.01171875, -0.03515625, 0.11328125, 0.43359375,
                            0.43359375,  0.11328125,  -0.03515625, -0.01171875};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(down.at(3 + i), expect[i], 1e-15) << i;

  // border taps fold back symmetrically: index -1 reads index 0
  const auto edge = row_of(bicubic_weights(4, 8, true), 0);
  EXPECT_NEAR(edge.at(0), cubic(0.75) + cubic(0.25), 1e-15);  // src = -0.25
}

TEST(Bicubic, ConstantStaysConstant) {
  ImagePlane c(20, 14, PlaneTag::Y, 0.37f);
  for (auto [h, w] : {std::pair{40, 28}, std::pair{7, 5}, std::pair{60, 42}, std::pair{20, 14}}) {
    const ImagePlane r = bicubic_resize(c, h, w);
    for (float v : r.samples) EXPECT_NEAR(v, 0.37f, 1e-6f);
  }
  const ImagePlane down = bicubic_resize(c, 10, 7);
  const ImagePlane back = bicubic_resize(down, 20, 14);
  for (float v : back.samples) EXPECT_NEAR(v, 0.37f, 1e-6f);
}

TEST(Bicubic, SameSizeIsIdentity) {
  const ImagePlane p = random_plane(11, 9, 6);
  EXPECT_EQ(bicubic_resize(p, 11, 9).samples, p.samples);
}

TEST(Bicubic, RampReproducedInInterior) {
  ImagePlane ramp(1, 16, PlaneTag::Y);
  for (std::size_t x = 0; x < 16; ++x) ramp.samples[x] = 0.1f + 0.05f * static_cast<float>(x);
  const ImagePlane up = bicubic_resize(ramp, 1, 32);
  for (std::size_t o = 4; o < 28; ++o) {
    const double src = (o + 0.5) / 2.0 - 0.5;
    EXPECT_NEAR(up.samples[o], 0.1 + 0.05 * src, 1e-6) << o;
  }
}

TEST(Bicubic, SeparableInEitherOrder) {
  const ImagePlane p = random_plane(12, 10, 7, 0.3f, 0.7f);
  ResizeOptions o;
  o.clamp = false;
  const ImagePlane hw = bicubic_resize(bicubic_resize(p, 30, 10, o), 30, 25, o);
  const ImagePlane wh = bicubic_resize(bicubic_resize(p, 12, 25, o), 30, 25, o);
  for (std::size_t i = 0; i < hw.samples.size(); ++i) EXPECT_NEAR(hw.samples[i], wh.samples[i], 1e-6f);
}

TEST(Bicubic, OutputClampedAndZeroSizeRejected) {
  ImagePlane step(1, 8, PlaneTag::Y);
  for (std::size_t x = 4; x < 8; ++x) step.samples[x] = 1.0f;
  const ImagePlane up = bicubic_resize(step, 1, 32);
  for (float v : up.samples) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_THROW(bicubic_resize(step, 0, 4), UsageError);
}

TEST(Planes, ModCropAndCrop) {
  const ImagePlane p = random_plane(77, 80, 8);
  const ImagePlane m = mod_crop(p, 3);
  EXPECT_EQ(m.height, 75u);
  EXPECT_EQ(m.width, 78u);
  EXPECT_EQ(m.at(74, 77), p.at(74, 77));
  const ImagePlane c = crop_plane(p, 5, 6, 3, 4);
  EXPECT_EQ(c.at(2, 3), p.at(7, 9));
  EXPECT_THROW(crop_plane(p, 76, 0, 2, 2), ShapeError);
}

TEST(Planes, QuantizeAndTensorBridge) {
  ImagePlane p(1, 3, PlaneTag::Y);
  p.samples = {0.5f, 1.2f, -0.1f};
  const ImagePlane q = quantize_8bit(p);
  EXPECT_FLOAT_EQ(q.samples[0], 128.0f / 255.0f);
  EXPECT_FLOAT_EQ(q.samples[1], 1.0f);
  EXPECT_FLOAT_EQ(q.samples[2], 0.0f);
  const Tensor t = plane_to_tensor<float>(p);
  EXPECT_EQ(t.shape(), (Shape{1, 1, 1, 3}));
  EXPECT_EQ(t[1], 1.2f);
  const ImagePlane back = tensor_to_plane(t, PlaneTag::Cb);
  EXPECT_EQ(back.tag, PlaneTag::Cb);
  EXPECT_EQ(back.samples, (std::vector<float>{0.5f, 1.0f, 0.0f}));
}
