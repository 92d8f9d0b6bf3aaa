// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "idn/imaging.hpp"

namespace idn {

struct EvalProtocol {
  /// Pixels removed from every side before measuring (nullopt = scale).
  std::optional<std::size_t> shave;
  double peak = 255.0;
  /// Snap both planes to the 8-bit grid before measuring.
  bool quantize = false;

  std::size_t shave_for(std::size_t scale) const { return shave.value_or(scale); }
};

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// Removes `border` pixels per side. UsageError unless 2*border < each extent.
ImagePlane shave_border(const ImagePlane& plane, std::size_t border);

/// PSNR in dB on [0,1] planes; identical planes give +inf.
double psnr(const ImagePlane& a, const ImagePlane& b, std::size_t border = 0, bool quantize = false);
double psnr(const ImagePlane& a, const ImagePlane& b, const EvalProtocol& protocol,
            std::size_t scale);

/// Single-scale SSIM: 11x11 Gaussian (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 1, mean over valid window positions.
double ssim(const ImagePlane& a, const ImagePlane& b, std::size_t border = 0, bool quantize = false);
double ssim(const ImagePlane& a, const ImagePlane& b, const EvalProtocol& protocol,
            std::size_t scale);

struct MetricRow {
  std::string image;
  double psnr = 0.0;
  double ssim = 0.0;
};

/// "inf" for infinite values, fixed 4 decimals otherwise.
std::string format_metric(double value);

/// Mean over rows (an infinite PSNR makes the mean infinite).
MetricRow mean_row(const std::vector<MetricRow>& rows);

/// Tab-separated report: header, one row per image, `#mean` summary row.
void write_metric_report(std::ostream& out, const std::vector<MetricRow>& rows);

}  // namespace idn
