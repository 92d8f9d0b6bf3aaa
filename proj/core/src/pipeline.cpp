// SPDX-License-Identifier: Apache-2.0
#include "idn/pipeline.hpp"

#include <string>

#include "idn/error.hpp"

namespace idn {

Upscaler parse_upscaler(std::string_view text) {
  if (text == "bicubic") return Upscaler::Bicubic;
  if (text == "idn") return Upscaler::Idn;
  throw UsageError("unknown method '" + std::string(text) + "' (expected bicubic or idn)");
}

DegradedPair degrade(const ImagePlane& hr, std::size_t m) {
  if (m == 0) throw UsageError("degrade: scale must be >= 1");
  if (hr.height < m || hr.width < m) throw UsageError("degrade: image smaller than the scale");
  DegradedPair p;
  p.hr = mod_crop(hr, m);
  p.lr = bicubic_resize(p.hr, p.hr.height / m, p.hr.width / m, true);
  return p;
}

ImagePlane bicubic_upscale(const ImagePlane& lr, std::size_t m) {
  return bicubic_resize(lr, lr.height * m, lr.width * m, true);
}

template <class T>
ImagePlane super_resolve(const ImagePlane& lr, const ModelParams<T>& params,
                         const IdnConfig& config) {
  const BasicTensor<T> out = idn_forward(plane_to_tensor<T>(lr), params, config, Mode::Infer);
  return tensor_to_plane(out, lr.tag);
}

template <class T>
ImageRGB super_resolve_image(const ImageRGB& image, Upscaler method, const ModelParams<T>* params,
                             const IdnConfig& config) {
  if (method == Upscaler::Idn && params == nullptr) {
    throw UsageError("idn upscaling needs model parameters");
  }
  const std::size_t m = config.scale;
  auto upscale = [&](const ImagePlane& p) {
    return method == Upscaler::Idn ? super_resolve(p, *params, config) : bicubic_upscale(p, m);
  };
  if (image.is_gray()) return plane_to_gray(upscale(gray_to_plane(image)));
  const YCbCrPlanes planes = rgb_to_ycbcr(image);
  YCbCrPlanes up{upscale(planes.y), bicubic_upscale(planes.cb, m), bicubic_upscale(planes.cr, m)};
  return ycbcr_to_rgb(up);
}

template ImagePlane super_resolve(const ImagePlane&, const ModelParams<float>&, const IdnConfig&);
template ImagePlane super_resolve(const ImagePlane&, const ModelParams<double>&, const IdnConfig&);
template ImageRGB super_resolve_image(const ImageRGB&, Upscaler, const ModelParams<float>*,
                                      const IdnConfig&);
template ImageRGB super_resolve_image(const ImageRGB&, Upscaler, const ModelParams<double>*,
                                      const IdnConfig&);

}  // namespace idn
