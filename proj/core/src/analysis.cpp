// SPDX-License-Identifier: Apache-2.0
#include "idn/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "idn/dataset.hpp"
#include "idn/error.hpp"
#include "idn/parallel.hpp"
#include "idn/pipeline.hpp"

#ifndef IDN_BUILD_PROFILE
#define IDN_BUILD_PROFILE "unknown"
#endif

namespace idn {
namespace {

ImagePlane normalize_minmax(const ImagePlane& p, float& lo, float& hi) {
  const auto [mn, mx] = std::minmax_element(p.samples.begin(), p.samples.end());
  lo = *mn;
  hi = *mx;
  ImagePlane out = p;
  const float range = hi - lo;
  for (float& v : out.samples) v = range > 0 ? (v - lo) / range : 0.0f;
  return out;
}

ImagePlane histogram_chart(const Histogram& h) {
  constexpr std::size_t kBarWidth = 4;
  constexpr std::size_t kHeight = 128;
  ImagePlane img(kHeight, h.bins() * kBarWidth, PlaneTag::Gray, 1.0f);
  const std::size_t peak = h.counts.empty() ? 0 : h.counts[h.mode_bin()];
  if (peak == 0) return img;
  for (std::size_t b = 0; b < h.bins(); ++b) {
    const auto bar = static_cast<std::size_t>(
        std::lround(static_cast<double>(h.counts[b]) / static_cast<double>(peak) * kHeight));
    for (std::size_t y = kHeight - bar; y < kHeight; ++y) {
      for (std::size_t x = b * kBarWidth; x + 1 < (b + 1) * kBarWidth; ++x) img.at(y, x) = 0.0f;
    }
  }
  return img;
}

ImagePlane residual_image(const ImagePlane& r) {
  ImagePlane out = r;
  for (float& v : out.samples) v = std::clamp(0.5f * v + 0.5f, 0.0f, 1.0f);
  return out;
}

}  // namespace

template <class T>
std::vector<UnitMap> feature_map_summary(const ModelParams<T>& params, const IdnConfig& config,
                                         const ImagePlane& lr) {
  FeatureCapture<T> capture;
  idn_forward(plane_to_tensor<T>(lr), params, config, Mode::Infer, &capture);
  std::vector<UnitMap> maps;
  auto add = [&](const std::string& prefix, const std::vector<BasicTensor<T>>& units) {
    for (std::size_t k = 0; k < units.size(); ++k) {
      const BasicTensor<T> mean = channel_mean(units[k]);
      ImagePlane plane(mean.h(), mean.w(), PlaneTag::Gray);
      for (std::size_t i = 0; i < plane.samples.size(); ++i) {
        plane.samples[i] = static_cast<float>(mean[i]);
      }
      maps.push_back({prefix + std::to_string(k + 1), std::move(plane)});
    }
  };
  add("enhancement_", capture.enhancement);
  add("compression_", capture.compression);
  return maps;
}

void write_feature_maps(const std::filesystem::path& dir, const std::vector<UnitMap>& maps) {
  std::filesystem::create_directories(dir);
  std::ofstream side(dir / "feature_maps.tsv");
  if (!side) throw IoError("cannot write " + (dir / "feature_maps.tsv").string());
  side << "map\tmin\tmax\n" << std::setprecision(9);
  for (const auto& m : maps) {
    float lo = 0, hi = 0;
    save_png(dir / (m.name + ".png"), normalize_minmax(m.plane, lo, hi));
    side << m.name << '\t' << lo << '\t' << hi << '\n';
  }
  if (!side) throw IoError("failed writing feature map sidecar");
}

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::size_t Histogram::mode_bin() const {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

bool Histogram::unimodal(double tolerance) const {
  if (counts.empty()) return false;
  const std::size_t mode = mode_bin();
  const double floor = tolerance * static_cast<double>(counts[mode]);
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (b == mode || static_cast<double>(counts[b]) <= floor) continue;
    const std::size_t left = b > 0 ? counts[b - 1] : 0;
    const std::size_t right = b + 1 < counts.size() ? counts[b + 1] : 0;
    if (counts[b] > left && counts[b] > right) return false;
  }
  return true;
}

Histogram make_histogram(const ImagePlane& values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw UsageError("histogram: need bins >= 1 and hi > lo");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (float v : values.samples) {
    if (v < lo || v > hi) ++h.clipped;
    auto b = static_cast<long long>(std::floor((static_cast<double>(v) - lo) * scale));
    b = std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

double fraction_within(const ImagePlane& values, double lo, double hi) {
  if (values.samples.empty()) return 0.0;
  std::size_t n = 0;
  for (float v : values.samples) n += (v >= lo && v <= hi) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(values.samples.size());
}

ImagePlane plane_difference(const ImagePlane& a, const ImagePlane& b) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError("plane_difference: plane sizes differ");
  }
  ImagePlane out(a.height, a.width, a.tag);
  for (std::size_t i = 0; i < a.samples.size(); ++i) out.samples[i] = a.samples[i] - b.samples[i];
  return out;
}

template <class T>
ResidualAnalysis residual_histogram(const ModelParams<T>& params, const IdnConfig& config,
                                    const ImagePlane& lr, const ImagePlane& hr) {
  const std::size_t m = config.scale;
  if (hr.height != m * lr.height || hr.width != m * lr.width) {
    throw ShapeError("residual_histogram: HR is not " + std::to_string(m) + "x the LR size");
  }
  const ImagePlane skip = bicubic_upscale(lr, m);
  const BasicTensor<T> out = idn_forward(plane_to_tensor<T>(lr), params, config, Mode::Infer);
  ImagePlane net(out.h(), out.w(), PlaneTag::Y);
  for (std::size_t i = 0; i < net.samples.size(); ++i) net.samples[i] = static_cast<float>(out[i]);

  ResidualAnalysis a;
  a.truth = plane_difference(hr, skip);
  a.model = plane_difference(net, skip);
  a.truth_hist = make_histogram(a.truth);
  a.model_hist = make_histogram(a.model);
  return a;
}

void write_residual_analysis(const std::filesystem::path& dir, const ResidualAnalysis& a) {
  std::filesystem::create_directories(dir);
  save_png(dir / "residual_truth.png", residual_image(a.truth));
  save_png(dir / "residual_model.png", residual_image(a.model));
  save_png(dir / "histogram_truth.png", histogram_chart(a.truth_hist));
  save_png(dir / "histogram_model.png", histogram_chart(a.model_hist));
  std::ofstream tsv(dir / "residual_histogram.tsv");
  if (!tsv) throw IoError("cannot write residual histogram table");
  tsv << "bin_low\tbin_high\ttruth\tmodel\n" << std::setprecision(6);
  for (std::size_t b = 0; b < a.truth_hist.bins(); ++b) {
    tsv << a.truth_hist.bin_low(b) << '\t' << a.truth_hist.bin_high(b) << '\t'
        << a.truth_hist.counts[b] << '\t' << a.model_hist.counts[b] << '\n';
  }
  if (!tsv) throw IoError("failed writing residual histogram table");
}

std::string environment_descriptor() {
  std::ostringstream os;
#if defined(__clang__)
  os << "clang " << __clang_major__ << '.' << __clang_minor__;
#elif defined(__GNUC__)
  os << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__;
#else
  os << "unknown-compiler";
#endif
  os << "; profile " << IDN_BUILD_PROFILE << "; threads " << num_threads() << "; hw_concurrency "
     << std::thread::hardware_concurrency();
  return os.str();
}

template <class T>
TimingReport bench(const ModelParams<T>& params, const IdnConfig& config,
                   const std::filesystem::path& dir, std::size_t repeats, std::size_t warmup) {
  if (repeats == 0) throw UsageError("bench: repeats must be >= 1");
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw UsageError("bench: not a directory: " + dir.string());
  const auto files = list_images(dir, std::nullopt);
  if (files.empty()) throw UsageError("bench: no PNG images in " + dir.string());

  TimingReport report;
  report.repeats = repeats;
  report.warmup = std::max<std::size_t>(warmup, 1);
  report.threads = num_threads();
  report.build_profile = IDN_BUILD_PROFILE;
  report.environment = environment_descriptor();

  using clock = std::chrono::steady_clock;
  double sum = 0.0;
  for (const auto& file : files) {
    const BasicTensor<T> x = plane_to_tensor<T>(degrade(luminance(load_png(file)), config.scale).lr);
    for (std::size_t i = 0; i < report.warmup; ++i) idn_forward(x, params, config, Mode::Infer);
    ImageTiming t;
    t.image = file.filename().string();
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto start = clock::now();
      const BasicTensor<T> y = idn_forward(x, params, config, Mode::Infer);
      const auto stop = clock::now();
      const double s = std::chrono::duration<double>(stop - start).count();
      t.seconds.push_back(std::max(s, 1e-9));
      if (y.empty()) throw StateError("bench: empty forward output");
    }
    double acc = 0.0;
    for (double s : t.seconds) acc += s;
    t.mean = acc / static_cast<double>(t.seconds.size());
    sum += t.mean;
    report.images.push_back(std::move(t));
  }
  report.mean_seconds = sum / static_cast<double>(report.images.size());
  return report;
}

void write_timing_report(std::ostream& out, const TimingReport& r) {
  out << "# environment\t" << r.environment << '\n';
  out << "# threads\t" << r.threads << '\n';
  out << "# build_profile\t" << r.build_profile << '\n';
  out << "# warmup\t" << r.warmup << '\n';
  out << "image";
  for (std::size_t i = 0; i < r.repeats; ++i) out << "\trun_" << (i + 1);
  out << "\tmean_s\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& img : r.images) {
    out << img.image;
    for (double s : img.seconds) out << '\t' << s;
    out << '\t' << img.mean << '\n';
  }
  out << "#mean";
  for (std::size_t i = 0; i < r.repeats; ++i) out << '\t';
  out << '\t' << r.mean_seconds << '\n';
}

template std::vector<UnitMap> feature_map_summary(const ModelParams<float>&, const IdnConfig&,
                                                  const ImagePlane&);
template std::vector<UnitMap> feature_map_summary(const ModelParams<double>&, const IdnConfig&,
                                                  const ImagePlane&);
template ResidualAnalysis residual_histogram(const ModelParams<float>&, const IdnConfig&,
                                             const ImagePlane&, const ImagePlane&);
template ResidualAnalysis residual_histogram(const ModelParams<double>&, const IdnConfig&,
                                             const ImagePlane&, const ImagePlane&);
template TimingReport bench(const ModelParams<float>&, const IdnConfig&,
                            const std::filesystem::path&, std::size_t, std::size_t);
template TimingReport bench(const ModelParams<double>&, const IdnConfig&,
                            const std::filesystem::path&, std::size_t, std::size_t);

}  // namespace idn
