// SPDX-License-Identifier: Apache-2.0
#include "idn/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace idn {
namespace {

// Forward BT.601 matrix on [0,1] RGB, giving 8-bit-scale YCbCr offsets.
constexpr double kForward[3][3] = {
    {65.481, 128.553, 24.966},
    {-37.797, -74.203, 112.0},
    {112.0, -93.786, -18.214},
};

// 255 * inverse(kForward): (Y-16, Cb-128, Cr-128) -> 8-bit RGB.
constexpr double kInverse[3][3] = {
    {1.1643835616438358, 3.0112439739772951e-07, 1.5960268873357040},
    {1.1643835616438358, -3.9176253994145005e-01, -8.1296829216220534e-01},
    {1.1643835616438358, 2.0172326395564593, 3.0542617453304942e-06},
};

constexpr double kOffsets[3] = {16.0, 128.0, 128.0};

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
}

float clamp_unit(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

double cubic(double x) {
  const double ax = std::abs(x);
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (ax <= 1.0) return 1.5 * ax3 - 2.5 * ax2 + 1.0;
  if (ax <= 2.0) return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
  return 0.0;
}

std::size_t reflect(std::ptrdiff_t i, std::size_t size) {
  const auto period = static_cast<std::ptrdiff_t>(2 * size);
  std::ptrdiff_t j = i % period;
  if (j < 0) j += period;
  if (j >= static_cast<std::ptrdiff_t>(size)) j = period - 1 - j;
  return static_cast<std::size_t>(j);
}

double round_8bit(double v) { return std::clamp(std::nearbyint(v * 255.0), 0.0, 255.0) / 255.0; }

}  // namespace

ImageRGB::ImageRGB(std::size_t h, std::size_t w, std::size_t ch)
    : height(h), width(w), channels(ch), samples(h * w * ch, 0) {}

ImagePlane::ImagePlane(std::size_t h, std::size_t w, PlaneTag t, float fill)
    : height(h), width(w), tag(t), samples(h * w, fill) {}

YCbCrPlanes rgb_to_ycbcr(const ImageRGB& image) {
  if (image.channels != 3) throw UsageError("rgb_to_ycbcr: image is not RGB");
  YCbCrPlanes out{ImagePlane(image.height, image.width, PlaneTag::Y),
                  ImagePlane(image.height, image.width, PlaneTag::Cb),
                  ImagePlane(image.height, image.width, PlaneTag::Cr)};
  ImagePlane* planes[3] = {&out.y, &out.cb, &out.cr};
  const std::size_t count = image.height * image.width;
  for (std::size_t i = 0; i < count; ++i) {
    const double rgb[3] = {image.samples[3 * i] / 255.0, image.samples[3 * i + 1] / 255.0,
                           image.samples[3 * i + 2] / 255.0};
    for (int k = 0; k < 3; ++k) {
      const double v =
          kOffsets[k] + kForward[k][0] * rgb[0] + kForward[k][1] * rgb[1] + kForward[k][2] * rgb[2];
      planes[k]->samples[i] = clamp_unit(v / 255.0);
    }
  }
  return out;
}

ImageRGB ycbcr_to_rgb(const YCbCrPlanes& planes) {
  const std::size_t h = planes.y.height;
  const std::size_t w = planes.y.width;
  if (planes.cb.height != h || planes.cb.width != w || planes.cr.height != h ||
      planes.cr.width != w) {
    throw ShapeError("ycbcr_to_rgb: plane sizes differ");
  }
  ImageRGB out(h, w, 3);
  for (std::size_t i = 0; i < h * w; ++i) {
    const double d[3] = {planes.y.samples[i] * 255.0 - kOffsets[0],
                         planes.cb.samples[i] * 255.0 - kOffsets[1],
                         planes.cr.samples[i] * 255.0 - kOffsets[2]};
    for (int k = 0; k < 3; ++k) {
      out.samples[3 * i + k] =
          to_u8(kInverse[k][0] * d[0] + kInverse[k][1] * d[1] + kInverse[k][2] * d[2]);
    }
  }
  return out;
}

ImagePlane gray_to_plane(const ImageRGB& image) {
  if (image.channels != 1) throw UsageError("gray_to_plane: image is not grayscale");
  ImagePlane out(image.height, image.width, PlaneTag::Gray);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = static_cast<float>(image.samples[i] / 255.0);
  }
  return out;
}

ImageRGB plane_to_gray(const ImagePlane& plane) {
  ImageRGB out(plane.height, plane.width, 1);
  for (std::size_t i = 0; i < plane.samples.size(); ++i) {
    out.samples[i] = to_u8(static_cast<double>(plane.samples[i]) * 255.0);
  }
  return out;
}

ImagePlane luminance(const ImageRGB& image) {
  return image.is_gray() ? gray_to_plane(image) : rgb_to_ycbcr(image).y;
}

ImagePlane quantize_8bit(const ImagePlane& plane) {
  ImagePlane out = plane;
  for (float& v : out.samples) v = static_cast<float>(round_8bit(v));
  return out;
}

ImagePlane crop_plane(const ImagePlane& plane, std::size_t top, std::size_t left,
                      std::size_t h, std::size_t w) {
  if (top + h > plane.height || left + w > plane.width) {
    throw ShapeError("crop_plane: window exceeds plane");
  }
  ImagePlane out(h, w, plane.tag);
  for (std::size_t y = 0; y < h; ++y) {
    const float* src = plane.samples.data() + (top + y) * plane.width + left;
    std::copy(src, src + w, out.samples.data() + y * w);
  }
  return out;
}

ImagePlane mod_crop(const ImagePlane& plane, std::size_t m) {
  return crop_plane(plane, 0, 0, plane.height - plane.height % m, plane.width - plane.width % m);
}

ImageRGB mod_crop(const ImageRGB& image, std::size_t m) {
  const std::size_t h = image.height - image.height % m;
  const std::size_t w = image.width - image.width % m;
  ImageRGB out(h, w, image.channels);
  for (std::size_t y = 0; y < h; ++y) {
    const auto* src = image.samples.data() + y * image.width * image.channels;
    std::copy(src, src + w * image.channels, out.samples.data() + y * w * image.channels);
  }
  return out;
}

ResizeWeights bicubic_weights(std::size_t in_size, std::size_t out_size, bool antialias) {
  if (in_size == 0 || out_size == 0) throw UsageError("bicubic_weights: zero extent");
  ResizeWeights rw;
  rw.in_size = in_size;
  rw.out_size = out_size;
  rw.offsets.reserve(out_size + 1);
  rw.offsets.push_back(0);

  const double scale = static_cast<double>(out_size) / static_cast<double>(in_size);
  const bool stretch = antialias && scale < 1.0;
  const double kernel_width = stretch ? 4.0 / scale : 4.0;
  const auto taps = static_cast<std::ptrdiff_t>(std::ceil(kernel_width)) + 2;

  std::vector<double> local(static_cast<std::size_t>(taps));
  for (std::size_t o = 0; o < out_size; ++o) {
    const double center = (static_cast<double>(o) + 0.5) / scale - 0.5;
    const auto left = static_cast<std::ptrdiff_t>(std::floor(center - kernel_width / 2.0));
    double total = 0.0;
    for (std::ptrdiff_t t = 0; t < taps; ++t) {
      const double dist = center - static_cast<double>(left + t);
      local[static_cast<std::size_t>(t)] = stretch ? scale * cubic(scale * dist) : cubic(dist);
      total += local[static_cast<std::size_t>(t)];
    }
    for (std::ptrdiff_t t = 0; t < taps; ++t) {
      const double wgt = local[static_cast<std::size_t>(t)] / total;
      if (wgt == 0.0) continue;
      rw.index.push_back(reflect(left + t, in_size));
      rw.weight.push_back(wgt);
    }
    rw.offsets.push_back(rw.index.size());
  }
  return rw;
}

template <class T>
void resize_plane(std::span<const T> in, std::size_t h, std::size_t w, const ResizeWeights& rows,
                  const ResizeWeights& cols, std::span<T> out, bool round_passes) {
  if (rows.in_size != h || cols.in_size != w || in.size() != h * w ||
      out.size() != rows.out_size * cols.out_size) {
    throw ShapeError("resize_plane: buffer sizes do not match weights");
  }
  const std::size_t oh = rows.out_size;
  const std::size_t ow = cols.out_size;
  std::vector<double> mid(oh * w, 0.0);
  for (std::size_t o = 0; o < oh; ++o) {
    double* dst = mid.data() + o * w;
    for (std::size_t t = rows.offsets[o]; t < rows.offsets[o + 1]; ++t) {
      const T* src = in.data() + rows.index[t] * w;
      const double wt = rows.weight[t];
      for (std::size_t x = 0; x < w; ++x) dst[x] += wt * static_cast<double>(src[x]);
    }
    if (round_passes) {
      for (std::size_t x = 0; x < w; ++x) dst[x] = round_8bit(dst[x]);
    }
  }
  for (std::size_t y = 0; y < oh; ++y) {
    const double* src = mid.data() + y * w;
    T* dst = out.data() + y * ow;
    for (std::size_t o = 0; o < ow; ++o) {
      double acc = 0.0;
      for (std::size_t t = cols.offsets[o]; t < cols.offsets[o + 1]; ++t) {
        acc += cols.weight[t] * src[cols.index[t]];
      }
      dst[o] = static_cast<T>(round_passes ? round_8bit(acc) : acc);
    }
  }
}

template <class T>
void resize_plane_adjoint(std::span<const T> grad_out, const ResizeWeights& rows,
                          const ResizeWeights& cols, std::span<T> grad_in) {
  const std::size_t h = rows.in_size;
  const std::size_t w = cols.in_size;
  const std::size_t oh = rows.out_size;
  const std::size_t ow = cols.out_size;
  if (grad_out.size() != oh * ow || grad_in.size() != h * w) {
    throw ShapeError("resize_plane_adjoint: buffer sizes do not match weights");
  }
  std::vector<double> mid(oh * w, 0.0);
  for (std::size_t y = 0; y < oh; ++y) {
    const T* src = grad_out.data() + y * ow;
    double* dst = mid.data() + y * w;
    for (std::size_t o = 0; o < ow; ++o) {
      for (std::size_t t = cols.offsets[o]; t < cols.offsets[o + 1]; ++t) {
        dst[cols.index[t]] += cols.weight[t] * static_cast<double>(src[o]);
      }
    }
  }
  std::vector<double> acc(h * w, 0.0);
  for (std::size_t o = 0; o < oh; ++o) {
    const double* src = mid.data() + o * w;
    for (std::size_t t = rows.offsets[o]; t < rows.offsets[o + 1]; ++t) {
      double* dst = acc.data() + rows.index[t] * w;
      const double wt = rows.weight[t];
      for (std::size_t x = 0; x < w; ++x) dst[x] += wt * src[x];
    }
  }
  for (std::size_t i = 0; i < h * w; ++i) grad_in[i] += static_cast<T>(acc[i]);
}

ImagePlane bicubic_resize(const ImagePlane& plane, std::size_t out_h, std::size_t out_w,
                          bool antialias) {
  ResizeOptions options;
  options.antialias = antialias;
  return bicubic_resize(plane, out_h, out_w, options);
}

ImagePlane bicubic_resize(const ImagePlane& plane, std::size_t out_h, std::size_t out_w,
                          const ResizeOptions& options) {
  if (out_h == 0 || out_w == 0) throw UsageError("bicubic_resize: output size must be >= 1");
  if (plane.height == 0 || plane.width == 0) throw UsageError("bicubic_resize: empty input");
  if (out_h == plane.height && out_w == plane.width) return plane;
  const auto rows = bicubic_weights(plane.height, out_h, options.antialias);
  const auto cols = bicubic_weights(plane.width, out_w, options.antialias);
  ImagePlane out(out_h, out_w, plane.tag);
  resize_plane<float>(plane.samples, plane.height, plane.width, rows, cols, out.samples,
                      options.round_passes);
  if (options.clamp) {
    for (float& v : out.samples) v = std::clamp(v, 0.0f, 1.0f);
  }
  return out;
}

template <class T>
BasicTensor<T> plane_to_tensor(const ImagePlane& plane) {
  std::vector<T> values(plane.samples.begin(), plane.samples.end());
  return BasicTensor<T>({1, 1, plane.height, plane.width}, std::move(values));
}

template <class T>
ImagePlane tensor_to_plane(const BasicTensor<T>& tensor, PlaneTag tag, std::size_t n) {
  if (tensor.c() != 1 || n >= tensor.n()) {
    throw ShapeError("tensor_to_plane: expected a single-channel tensor, got " +
                     tensor.shape().str());
  }
  ImagePlane out(tensor.h(), tensor.w(), tag);
  const T* src = tensor.plane(n, 0);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = clamp_unit(static_cast<double>(src[i]));
  }
  return out;
}

#define IDN_INSTANTIATE(T)                                                                   \
  template void resize_plane(std::span<const T>, std::size_t, std::size_t,                   \
                             const ResizeWeights&, const ResizeWeights&, std::span<T>, bool); \
  template void resize_plane_adjoint(std::span<const T>, const ResizeWeights&,               \
                                     const ResizeWeights&, std::span<T>);                    \
  template BasicTensor<T> plane_to_tensor<T>(const ImagePlane&);                             \
  template ImagePlane tensor_to_plane(const BasicTensor<T>&, PlaneTag, std::size_t);

IDN_INSTANTIATE(float)
IDN_INSTANTIATE(double)
#undef IDN_INSTANTIATE

}  // namespace idn
