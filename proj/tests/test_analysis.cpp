// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "idn/analysis.hpp"
#include "idn/pipeline.hpp"

using namespace idn;
using idn::testing::data_path;
using idn::testing::TempDir;

namespace {

ImagePlane noise(std::size_t h, std::size_t w, std::uint64_t seed) {
  ImagePlane p(h, w, PlaneTag::Y);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0, 1);
  for (float& v : p.samples) v = u(rng);
  return p;
}

// Per-pixel average over channels, written out longhand.
ImagePlane mean_over_channels(const TensorD& t) {
  ImagePlane p(t.h(), t.w(), PlaneTag::Gray);
  for (std::size_t y = 0; y < t.h(); ++y)
    for (std::size_t x = 0; x < t.w(); ++x) {
      double s = 0;
      for (std::size_t c = 0; c < t.c(); ++c) s += t(0, c, y, x);
      p.at(y, x) = static_cast<float>(s / static_cast<double>(t.c()));
    }
  return p;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(FeatureMaps, FourPlusFourSizedToInput) {
  IdnConfig c;
  c.scale = 2;
  const auto p = init_params<float>(c, 1);
  const auto maps = feature_map_summary(p, c, noise(13, 17, 2));
  ASSERT_EQ(maps.size(), 8u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(maps[k].name, "enhancement_" + std::to_string(k + 1));
    EXPECT_EQ(maps[4 + k].name, "compression_" + std::to_string(k + 1));
  }
  for (const auto& m : maps) {
    EXPECT_EQ(m.plane.height, 13u);
    EXPECT_EQ(m.plane.width, 17u);
  }
}

TEST(FeatureMaps, MatchStepwiseForwardOracle) {
  IdnConfig c;
  c.num_dblocks = 2;
  const auto p = init_params<double>(c, 3);
  const ImagePlane lr = noise(9, 8, 4);
  const auto maps = feature_map_summary(p, c, lr);
  ASSERT_EQ(maps.size(), 4u);

  TensorD b = fblock_forward(plane_to_tensor<double>(lr), p, c);
  for (std::size_t k = 1; k <= 2; ++k) {
    const TensorD e = enhancement_forward(b, p, c, k);
    b = compression_forward(e, p, c, k);
    const ImagePlane me = mean_over_channels(e);
    const ImagePlane mb = mean_over_channels(b);
    for (std::size_t i = 0; i < me.samples.size(); ++i) {
      EXPECT_NEAR(maps[k - 1].plane.samples[i], me.samples[i], 1e-6);
      EXPECT_NEAR(maps[2 + k - 1].plane.samples[i], mb.samples[i], 1e-6);
    }
  }
}

TEST(FeatureMaps, ZeroWeightsGiveConstantMaps) {
  const IdnConfig c = tiny_config(3);
  const ModelParams<float> zero(c);
  for (const auto& m : feature_map_summary(zero, c, ImagePlane(6, 6, PlaneTag::Y, 0.4f)))
    for (float v : m.plane.samples) EXPECT_EQ(v, m.plane.samples[0]);
}

TEST(FeatureMaps, WrittenWithSidecar) {
  TempDir dir;
  const IdnConfig c = tiny_config(2);
  const auto maps = feature_map_summary(init_params<float>(c, 1), c, noise(10, 12, 5));
  write_feature_maps(dir / "nested" / "out", maps);
  const auto lines = lines_of(dir / "nested" / "out" / "feature_maps.tsv");
  ASSERT_EQ(lines.size(), maps.size() + 1);
  EXPECT_EQ(lines[0], "map\tmin\tmax");
  for (const auto& m : maps) {
    const ImageRGB png = load_png(dir / "nested" / "out" / (m.name + ".png"));
    EXPECT_EQ(png.channels, 1u);
    EXPECT_EQ(png.height, 10u);
  }
  std::istringstream row(lines[1]);
  std::string name;
  float lo = 0, hi = 0;
  row >> name >> lo >> hi;
  EXPECT_EQ(name, maps[0].name);
  EXPECT_FLOAT_EQ(lo, *std::min_element(maps[0].plane.samples.begin(), maps[0].plane.samples.end()));
  EXPECT_FLOAT_EQ(hi, *std::max_element(maps[0].plane.samples.begin(), maps[0].plane.samples.end()));
}

TEST(Histogram, CountsPartitionAndBinning) {
  const ImagePlane v = noise(20, 30, 6);
  const Histogram h = make_histogram(v);
  EXPECT_EQ(h.bins(), 64u);
  EXPECT_EQ(h.total(), 600u);
  ImagePlane edges(1, 5, PlaneTag::Gray);
  edges.samples = {-1.0f, 0.0f, 1.0f / 32.0f - 1e-4f, 1.0f, 2.0f};
  const Histogram e = make_histogram(edges);
  EXPECT_EQ(e.counts[0], 1u);
  EXPECT_EQ(e.counts[32], 2u);
  EXPECT_EQ(e.counts[63], 2u);
  EXPECT_EQ(e.clipped, 1u);
  EXPECT_DOUBLE_EQ(e.bin_low(32), 0.0);
  EXPECT_DOUBLE_EQ(fraction_within(edges, -0.5, 0.5), 0.4);
}

TEST(Histogram, Unimodality) {
  Histogram h;
  h.counts = {0, 2, 10, 3, 0};
  EXPECT_TRUE(h.unimodal());
  h.counts = {0, 2, 10, 3, 6, 0};
  EXPECT_FALSE(h.unimodal());
  EXPECT_EQ(h.mode_bin(), 2u);
}

TEST(Residual, ZeroResidualIsSingleSpike) {
  const ImagePlane lr = noise(12, 12, 7);
  const ImagePlane hr = bicubic_upscale(lr, 2);
  IdnConfig c = tiny_config(2);
  const ModelParams<float> zero(c);
  const ResidualAnalysis a = residual_histogram(zero, c, lr, hr);
  EXPECT_EQ(a.truth_hist.counts[32], 24u * 24u);
  EXPECT_EQ(a.truth_hist.mode_bin(), 32u);
  EXPECT_EQ(a.truth_hist.total(), 576u);
  for (float v : a.model.samples) EXPECT_EQ(v, 0.0f);
}

TEST(Residual, TruthMatchesDirectDifference) {
  const ImagePlane hr = mod_crop(luminance(load_png(data_path("chelsea_crop.png"))), 3);
  const DegradedPair d = degrade(hr, 3);
  const IdnConfig c = tiny_config(3);
  const ResidualAnalysis a = residual_histogram(init_params<float>(c, 2), c, d.lr, d.hr);
  const ImagePlane up = bicubic_resize(d.lr, d.hr.height, d.hr.width);
  for (std::size_t i = 0; i < up.samples.size(); i += 97)
    EXPECT_FLOAT_EQ(a.truth.samples[i], d.hr.samples[i] - up.samples[i]);
  EXPECT_THROW(residual_histogram(init_params<float>(c, 2), c, d.lr, crop_plane(d.hr, 0, 0, 30, 30)),
               ShapeError);
}

TEST(Residual, RealPairConcentratedNearZero) {
  const ImagePlane hr = luminance(load_png(data_path("astronaut_crop.png")));
  const DegradedPair d = degrade(hr, 2);
  const IdnConfig c = tiny_config(2);
  const ResidualAnalysis a = residual_histogram(ModelParams<float>(c), c, d.lr, d.hr);
  EXPECT_TRUE(a.truth_hist.unimodal());
  EXPECT_TRUE(a.truth_hist.mode_bin() == 31 || a.truth_hist.mode_bin() == 32);
  EXPECT_GE(fraction_within(a.truth, -0.6, 0.6), 0.95);
}

TEST(Residual, WritesArtifacts) {
  TempDir dir;
  const ImagePlane lr = noise(8, 8, 1);
  const IdnConfig c = tiny_config(2);
  write_residual_analysis(dir / "r", residual_histogram(init_params<float>(c, 1), c, lr, bicubic_upscale(lr, 2)));
  for (const char* f : {"residual_truth.png", "residual_model.png", "histogram_truth.png", "histogram_model.png",
                        "residual_histogram.tsv"})
    EXPECT_TRUE(std::filesystem::exists(dir / "r" / f)) << f;
}

TEST(Bench, RepeatsAndMean) {
  TempDir dir;
  save_png(dir / "a.png", load_png(data_path("camera_gray.png")));
  save_png(dir / "b.png", load_png(data_path("chelsea_crop.png")));
  const IdnConfig c = tiny_config(3);
  const TimingReport r = bench(init_params<float>(c, 1), c, dir.path(), 3);
  ASSERT_EQ(r.images.size(), 2u);
  EXPECT_EQ(r.repeats, 3u);
  double total = 0;
  for (const auto& img : r.images) {
    ASSERT_EQ(img.seconds.size(), 3u);
    double s = 0;
    for (double t : img.seconds) {
      EXPECT_GT(t, 0.0);
      s += t;
    }
    EXPECT_NEAR(img.mean, s / 3.0, 1e-12);
    total += img.mean;
  }
  EXPECT_NEAR(r.mean_seconds, total / 2.0, 1e-12);
  std::ostringstream os;
  write_timing_report(os, r);
  EXPECT_NE(os.str().find("# threads\t"), std::string::npos);
  EXPECT_NE(os.str().find("image\trun_1\trun_2\trun_3\tmean_s"), std::string::npos);
  EXPECT_NE(os.str().find("\n#mean"), std::string::npos);
}

TEST(Bench, Errors) {
  TempDir dir;
  const IdnConfig c = tiny_config(3);
  const auto p = init_params<float>(c, 1);
  EXPECT_THROW(bench(p, c, dir.path(), 3), UsageError);
  EXPECT_THROW(bench(p, c, dir / "missing", 3), UsageError);
  save_png(dir / "a.png", load_png(data_path("camera_gray.png")));
  EXPECT_THROW(bench(p, c, dir.path(), 0), UsageError);
}
