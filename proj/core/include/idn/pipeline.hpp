// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

#include "idn/imaging.hpp"
#include "idn/model.hpp"

namespace idn {

enum class Upscaler { Bicubic, Idn };

Upscaler parse_upscaler(std::string_view text);

/// Mod-crops a ground truth to multiples of m and downscales it by m with
/// the antialiased bicubic kernel. Returns the cropped HR and its LR.
struct DegradedPair {
  ImagePlane hr;
  ImagePlane lr;
};
DegradedPair degrade(const ImagePlane& hr, std::size_t m);

/// Plain bicubic enlargement by m (clamped to [0,1]).
ImagePlane bicubic_upscale(const ImagePlane& lr, std::size_t m);

/// Network output for one plane, infer geometry, clamped to [0,1].
template <class T>
ImagePlane super_resolve(const ImagePlane& lr, const ModelParams<T>& params,
                         const IdnConfig& config);

/// Upscales the luminance with `method` (params may be null for bicubic),
/// chroma with bicubic, then recombines. Grayscale images skip the colour
/// conversion.
template <class T>
ImageRGB super_resolve_image(const ImageRGB& image, Upscaler method, const ModelParams<T>* params,
                             const IdnConfig& config);

}  // namespace idn
