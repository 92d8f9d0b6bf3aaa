// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "idn/imaging.hpp"
#include "idn/model.hpp"

namespace idn {

struct UnitMap {
  std::string name;  // "enhancement_<k>" or "compression_<k>"
  ImagePlane plane;  // channel mean, raw values
};

/// Channel-mean maps of every enhancement output P^k and compression output
/// B_k for one LR input, enhancement maps first.
template <class T>
std::vector<UnitMap> feature_map_summary(const ModelParams<T>& params, const IdnConfig& config,
                                         const ImagePlane& lr);

/// One min-max normalised PNG per map plus `feature_maps.tsv` holding each
/// map's (min, max). Creates `dir` if needed.
void write_feature_maps(const std::filesystem::path& dir, const std::vector<UnitMap>& maps);

struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  /// Samples outside [lo, hi], counted in the end bins as well.
  std::size_t clipped = 0;

  std::size_t bins() const { return counts.size(); }
  std::size_t total() const;
  std::size_t mode_bin() const;
  double bin_low(std::size_t b) const { return lo + (hi - lo) * static_cast<double>(b) / bins(); }
  double bin_high(std::size_t b) const { return bin_low(b + 1); }
  /// True when no bin other than the mode is a local maximum holding more
  /// than `tolerance` times the mode's count.
  bool unimodal(double tolerance = 0.01) const;
};

Histogram make_histogram(const ImagePlane& values, std::size_t bins = 64, double lo = -1.0,
                         double hi = 1.0);

/// Fraction of samples in [lo, hi].
double fraction_within(const ImagePlane& values, double lo, double hi);

/// Difference a - b of equally sized planes (ShapeError otherwise).
ImagePlane plane_difference(const ImagePlane& a, const ImagePlane& b);

struct ResidualAnalysis {
  ImagePlane truth;  // hr - bicubic(lr)
  ImagePlane model;  // idn(lr) - bicubic(lr)
  Histogram truth_hist;
  Histogram model_hist;
};

/// `hr` must be exactly m times `lr` in both directions.
template <class T>
ResidualAnalysis residual_histogram(const ModelParams<T>& params, const IdnConfig& config,
                                    const ImagePlane& lr, const ImagePlane& hr);

/// Residual PNGs (mapped from [-1,1] to [0,1]), one bar-chart PNG per
/// histogram and `residual_histogram.tsv`.
void write_residual_analysis(const std::filesystem::path& dir, const ResidualAnalysis& analysis);

struct ImageTiming {
  std::string image;
  std::vector<double> seconds;
  double mean = 0.0;
};

struct TimingReport {
  std::vector<ImageTiming> images;
  double mean_seconds = 0.0;
  std::size_t repeats = 0;
  std::size_t warmup = 0;
  int threads = 1;
  std::string build_profile;
  std::string environment;
};

/// Compiler, build profile, thread count and hardware concurrency.
std::string environment_descriptor();

/// Times the network forward pass on the LR version of every PNG in `dir`.
/// Decoding and degradation happen before the clock starts. Throws
/// UsageError for an empty directory or repeats == 0.
template <class T>
TimingReport bench(const ModelParams<T>& params, const IdnConfig& config,
                   const std::filesystem::path& dir, std::size_t repeats, std::size_t warmup = 1);

/// Tab-separated: comment lines with the environment, a header, one row per
/// image with each sample and the mean, then `#mean`.
void write_timing_report(std::ostream& out, const TimingReport& report);

}  // namespace idn
