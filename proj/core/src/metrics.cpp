// SPDX-License-Identifier: Apache-2.0
#include "idn/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "idn/error.hpp"

namespace idn {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void check_dims(const ImagePlane& a, const ImagePlane& b, const char* what) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError(std::string(what) + ": plane sizes differ (" + std::to_string(a.height) + "x" +
                     std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                     std::to_string(b.width) + ")");
  }
}

std::pair<ImagePlane, ImagePlane> prepare(const ImagePlane& a, const ImagePlane& b,
                                          std::size_t border, bool quantize, const char* what) {
  check_dims(a, b, what);
  ImagePlane sa = shave_border(a, border);
  ImagePlane sb = shave_border(b, border);
  if (quantize) {
    sa = quantize_8bit(sa);
    sb = quantize_8bit(sb);
  }
  return {std::move(sa), std::move(sb)};
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    g[i] = std::exp(-(x * x) / (2.0 * kSigma * kSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable 'valid' filtering of a (h, w) field.
std::vector<double> filter_valid(const std::vector<double>& in, std::size_t h, std::size_t w,
                                 const std::array<double, kWindow>& g) {
  const std::size_t oh = h - kWindow + 1;
  const std::size_t ow = w - kWindow + 1;
  std::vector<double> tmp(oh * w, 0.0);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * in[(y + k) * w + x];
      tmp[y * w + x] = acc;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * tmp[y * w + x + k];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

ImagePlane shave_border(const ImagePlane& plane, std::size_t border) {
  if (border == 0) return plane;
  if (2 * border >= plane.height || 2 * border >= plane.width) {
    throw UsageError("shave of " + std::to_string(border) + " px leaves nothing of a " +
                     std::to_string(plane.height) + "x" + std::to_string(plane.width) + " plane");
  }
  return crop_plane(plane, border, border, plane.height - 2 * border, plane.width - 2 * border);
}

double psnr(const ImagePlane& a, const ImagePlane& b, std::size_t border, bool quantize) {
  const auto [sa, sb] = prepare(a, b, border, quantize, "psnr");
  double sum = 0.0;
  for (std::size_t i = 0; i < sa.samples.size(); ++i) {
    const double d = static_cast<double>(sa.samples[i]) - static_cast<double>(sb.samples[i]);
    sum += d * d;
  }
  if (sum == 0.0) return kInfinitePsnr;
  const double mse = sum / static_cast<double>(sa.samples.size());
  return 10.0 * std::log10(1.0 / mse);
}

double psnr(const ImagePlane& a, const ImagePlane& b, const EvalProtocol& protocol,
            std::size_t scale) {
  return psnr(a, b, protocol.shave_for(scale), protocol.quantize);
}

double ssim(const ImagePlane& a, const ImagePlane& b, std::size_t border, bool quantize) {
  const auto [sa, sb] = prepare(a, b, border, quantize, "ssim");
  const std::size_t h = sa.height;
  const std::size_t w = sa.width;
  if (h < kWindow || w < kWindow) {
    throw UsageError("ssim needs at least 11x11 pixels after shaving, got " + std::to_string(h) +
                     "x" + std::to_string(w));
  }
  const std::size_t n = h * w;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = sa.samples[i];
    y[i] = sb.samples[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto g = gaussian_taps();
  const auto mx = filter_valid(x, h, w, g);
  const auto my = filter_valid(y, h, w, g);
  const auto sxx = filter_valid(xx, h, w, g);
  const auto syy = filter_valid(yy, h, w, g);
  const auto sxy = filter_valid(xy, h, w, g);
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cxy = sxy[i] - mx[i] * my[i];
    total += ((2 * mx[i] * my[i] + c1) * (2 * cxy + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

double ssim(const ImagePlane& a, const ImagePlane& b, const EvalProtocol& protocol,
            std::size_t scale) {
  return ssim(a, b, protocol.shave_for(scale), protocol.quantize);
}

std::string format_metric(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

MetricRow mean_row(const std::vector<MetricRow>& rows) {
  MetricRow m{"#mean", 0.0, 0.0};
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.psnr += r.psnr;
    m.ssim += r.ssim;
  }
  m.psnr /= static_cast<double>(rows.size());
  m.ssim /= static_cast<double>(rows.size());
  return m;
}

void write_metric_report(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "image\tpsnr\tssim\n";
  for (const auto& r : rows) {
    out << r.image << '\t' << format_metric(r.psnr) << '\t' << format_metric(r.ssim) << '\n';
  }
  const MetricRow m = mean_row(rows);
  out << "#mean\t" << format_metric(m.psnr) << '\t' << format_metric(m.ssim) << '\n';
}

}  // namespace idn
