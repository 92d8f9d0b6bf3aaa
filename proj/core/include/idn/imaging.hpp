// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "idn/tensor.hpp"

namespace idn {

/// 8-bit interleaved image. channels is 3 for RGB sources and 1 for
/// grayscale sources; color conversion is skipped for the latter.
struct ImageRGB {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 3;
  std::vector<std::uint8_t> samples;

  ImageRGB() = default;
  ImageRGB(std::size_t h, std::size_t w, std::size_t ch = 3);

  bool is_gray() const { return channels == 1; }
  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t ch) {
    return samples[(y * width + x) * channels + ch];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t ch) const {
    return samples[(y * width + x) * channels + ch];
  }
  friend bool operator==(const ImageRGB&, const ImageRGB&) = default;
};

enum class PlaneTag { Y, Cb, Cr, Gray };

/// Single-channel floating image with samples nominally in [0,1].
struct ImagePlane {
  std::size_t height = 0;
  std::size_t width = 0;
  PlaneTag tag = PlaneTag::Gray;
  std::vector<float> samples;

  ImagePlane() = default;
  ImagePlane(std::size_t h, std::size_t w, PlaneTag t = PlaneTag::Gray, float fill = 0.0f);

  float& at(std::size_t y, std::size_t x) { return samples[y * width + x]; }
  float at(std::size_t y, std::size_t x) const { return samples[y * width + x]; }
  friend bool operator==(const ImagePlane&, const ImagePlane&) = default;
};

struct YCbCrPlanes {
  ImagePlane y;
  ImagePlane cb;
  ImagePlane cr;
};

/// Reads an 8-bit grayscale or RGB(A) PNG. Alpha is dropped, palettes are
/// expanded. Throws IoError for missing files, non-PNG data and 16-bit depth.
ImageRGB load_png(const std::filesystem::path& path);

/// Writes an 8-bit PNG with the image's channel count.
void save_png(const std::filesystem::path& path, const ImageRGB& image);

/// Writes a plane as a single-channel 8-bit PNG (rounded, saturated).
void save_png(const std::filesystem::path& path, const ImagePlane& plane);

/// BT.601 studio-swing conversion, planes scaled to [0,1] by 1/255.
YCbCrPlanes rgb_to_ycbcr(const ImageRGB& image);

/// Inverse of rgb_to_ycbcr, rounded and saturated to 8 bits.
ImageRGB ycbcr_to_rgb(const YCbCrPlanes& planes);

/// Grayscale source to a Gray plane (sample / 255).
ImagePlane gray_to_plane(const ImageRGB& image);

/// Rounds and saturates a plane to an 8-bit grayscale image.
ImageRGB plane_to_gray(const ImagePlane& plane);

/// Luminance (or the gray channel itself) of an image.
ImagePlane luminance(const ImageRGB& image);

/// Snaps samples to the k/255 grid.
ImagePlane quantize_8bit(const ImagePlane& plane);

/// Trims bottom/right rows and columns so both extents divide `m`.
ImagePlane mod_crop(const ImagePlane& plane, std::size_t m);
ImageRGB mod_crop(const ImageRGB& image, std::size_t m);

/// Crops a window out of a plane.
ImagePlane crop_plane(const ImagePlane& plane, std::size_t top, std::size_t left,
                      std::size_t h, std::size_t w);

/// One-dimensional resampling operator in sparse row form: output sample o
/// reads taps [offsets[o], offsets[o+1]) of (index, weight).
struct ResizeWeights {
  std::size_t in_size = 0;
  std::size_t out_size = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

/// Cubic-convolution weights (a = -0.5) with half-pixel centring. With
/// `antialias` and out < in the kernel is stretched by in/out. Rows are
/// normalised to sum to one; out-of-range taps reflect symmetrically.
ResizeWeights bicubic_weights(std::size_t in_size, std::size_t out_size, bool antialias);

struct ResizeOptions {
  bool antialias = true;
  /// Clamp the final output to [0,1].
  bool clamp = true;
  /// Round every separable pass to the 8-bit grid (uint8 pipeline emulation).
  bool round_passes = false;
};

/// Separable bicubic resize: height pass first, then width.
ImagePlane bicubic_resize(const ImagePlane& plane, std::size_t out_h, std::size_t out_w,
                          bool antialias = true);
ImagePlane bicubic_resize(const ImagePlane& plane, std::size_t out_h, std::size_t out_w,
                          const ResizeOptions& options);

/// Raw kernel used by both the plane API and the network skip path. Writes
/// the unclamped result to `out`; accumulation happens in double.
template <class T>
void resize_plane(std::span<const T> in, std::size_t h, std::size_t w, const ResizeWeights& rows,
                  const ResizeWeights& cols, std::span<T> out, bool round_passes = false);

/// Adjoint of resize_plane (without rounding): scatters `grad_out` back.
template <class T>
void resize_plane_adjoint(std::span<const T> grad_out, const ResizeWeights& rows,
                          const ResizeWeights& cols, std::span<T> grad_in);

/// Converts a plane to a (1,1,h,w) tensor and back.
template <class T>
BasicTensor<T> plane_to_tensor(const ImagePlane& plane);
template <class T>
ImagePlane tensor_to_plane(const BasicTensor<T>& tensor, PlaneTag tag = PlaneTag::Y,
                           std::size_t n = 0);

}  // namespace idn
