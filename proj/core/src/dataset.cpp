// SPDX-License-Identifier: Apache-2.0
#include "idn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace idn {

PatchSpec PatchSpec::make(std::size_t scale, std::size_t lr_size, PatchPhase phase) {
  PatchSpec spec;
  spec.scale = scale;
  spec.lr_size = lr_size;
  spec.hr_size = scale * lr_size - scale + 1;
  spec.phase = phase;
  spec.validate();
  return spec;
}

PatchSpec PatchSpec::standard(std::size_t scale, PatchPhase phase) {
  const bool fine = phase == PatchPhase::FineTuning;
  switch (scale) {
    case 2: return make(2, fine ? 39 : 29, phase);
    case 3: return make(3, fine ? 26 : 15, phase);
    case 4: return make(4, fine ? 19 : 11, phase);
    default: throw UsageError("patch spec: scale must be 2, 3 or 4");
  }
}

void PatchSpec::validate() const {
  if (scale < 2 || scale > 4) throw UsageError("patch spec: scale must be 2, 3 or 4");
  if (lr_size == 0) throw UsageError("patch spec: lr_size must be >= 1");
  if (hr_size != scale * lr_size - scale + 1) {
    throw UsageError("patch spec: hr_size must equal m*lr_size - m + 1");
  }
}

ImagePlane rotate90(const ImagePlane& plane, int quarter_turns) {
  const int turns = ((quarter_turns % 4) + 4) % 4;
  if (turns == 0) return plane;
  const std::size_t h = plane.height;
  const std::size_t w = plane.width;
  const bool swap = turns % 2 == 1;
  ImagePlane out(swap ? w : h, swap ? h : w, plane.tag);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const float v = plane.at(y, x);
      switch (turns) {
        case 1: out.at(w - 1 - x, y) = v; break;  // counter-clockwise
        case 2: out.at(h - 1 - y, w - 1 - x) = v; break;
        case 3: out.at(x, h - 1 - y) = v; break;
      }
    }
  }
  return out;
}

ImagePlane flip_horizontal(const ImagePlane& plane) {
  ImagePlane out = plane;
  for (std::size_t y = 0; y < plane.height; ++y) {
    auto row = out.samples.begin() + static_cast<std::ptrdiff_t>(y * plane.width);
    std::reverse(row, row + static_cast<std::ptrdiff_t>(plane.width));
  }
  return out;
}

AugmentedImage augment_variant(const ImagePlane& image, std::size_t index, std::size_t source_id) {
  if (index >= kAugmentVariants) throw UsageError("augment: variant index out of range");
  AugmentedImage out;
  out.source_id = source_id;
  out.rescale = kAugmentScales[index / 8];
  out.rotation = static_cast<int>((index / 2) % 4) * 90;
  out.hflip = index % 2 == 1;

  ImagePlane plane = image;
  if (out.rescale != 1.0) {
    const auto h = static_cast<std::size_t>(std::lround(image.height * out.rescale));
    const auto w = static_cast<std::size_t>(std::lround(image.width * out.rescale));
    plane = bicubic_resize(image, std::max<std::size_t>(h, 1), std::max<std::size_t>(w, 1), true);
  }
  plane = rotate90(plane, out.rotation / 90);
  if (out.hflip) plane = flip_horizontal(plane);
  out.plane = std::move(plane);
  return out;
}

std::vector<AugmentedImage> augment(const ImagePlane& image, std::size_t source_id) {
  std::vector<AugmentedImage> out;
  out.reserve(kAugmentVariants);
  for (std::size_t i = 0; i < kAugmentVariants; ++i) out.push_back(augment_variant(image, i, source_id));
  return out;
}

std::optional<LrHrPair> make_pair(const ImagePlane& hr, std::size_t m) {
  if (m == 0) throw UsageError("make_pair: scale must be >= 1");
  if (hr.height < m || hr.width < m) return std::nullopt;
  LrHrPair pair;
  pair.scale = m;
  pair.hr = mod_crop(hr, m);
  pair.lr = bicubic_resize(pair.hr, pair.hr.height / m, pair.hr.width / m, true);
  return pair;
}

PatchSample extract_patch(const LrHrPair& pair, const PatchSpec& spec, std::size_t row,
                          std::size_t col) {
  spec.validate();
  const std::size_t m = spec.scale;
  if (pair.scale != m || pair.hr.height != m * pair.lr.height || pair.hr.width != m * pair.lr.width) {
    throw UsageError("extract_patch: pair scale does not match the patch spec");
  }
  const std::size_t l = spec.lr_size;
  if (row + l > pair.lr.height || col + l > pair.lr.width) {
    throw UsageError("extract_patch: window exceeds the LR image");
  }
  const std::size_t lead = (m - 1) / 2;
  PatchSample s;
  s.lr = crop_plane(pair.lr, row, col, l, l);
  s.hr = crop_plane(pair.hr, m * row + lead, m * col + lead, spec.hr_size, spec.hr_size);
  return s;
}

PatchStream::PatchStream(const LrHrPair& pair, const PatchSpec& spec, std::uint64_t seed)
    : pair_(&pair), spec_(spec), rng_(seed) {
  spec_.validate();
  if (pair.scale != spec.scale) throw UsageError("patch stream: pair scale does not match spec");
  if (pair.lr.height < spec.lr_size || pair.lr.width < spec.lr_size) {
    throw UsageError("patch stream: LR image smaller than the patch");
  }
}

PatchSample PatchStream::next() {
  std::uniform_int_distribution<std::size_t> rows(0, pair_->lr.height - spec_.lr_size);
  std::uniform_int_distribution<std::size_t> cols(0, pair_->lr.width - spec_.lr_size);
  const std::size_t r = rows(rng_);
  const std::size_t c = cols(rng_);
  return extract_patch(*pair_, spec_, r, c);
}

std::vector<PatchSample> extract_patches(const LrHrPair& pair, const PatchSpec& spec,
                                         std::uint64_t seed, std::size_t count) {
  PatchStream stream(pair, spec, seed);
  std::vector<PatchSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(stream.next());
  return out;
}

std::vector<std::filesystem::path> list_images(
    const std::filesystem::path& dir, const std::optional<std::filesystem::path>& manifest) {
  std::vector<std::filesystem::path> out;
  if (manifest) {
    std::ifstream in(*manifest);
    if (!in) throw IoError("cannot read manifest " + manifest->string());
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      std::filesystem::path p(line);
      out.push_back(p.is_absolute() ? p : manifest->parent_path() / p);
    }
    return out;
  }
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

TrainingCorpus::TrainingCorpus(std::vector<ImagePlane> images, Options options)
    : images_(std::move(images)), options_(options) {
  if (images_.empty()) throw IoError("training corpus is empty");
}

TrainingCorpus::TrainingCorpus(std::vector<ImagePlane> images)
    : TrainingCorpus(std::move(images), Options{}) {}

TrainingCorpus TrainingCorpus::from_directory(
    const std::filesystem::path& dir, const std::optional<std::filesystem::path>& manifest,
    Options options) {
  std::vector<ImagePlane> planes;
  for (const auto& path : list_images(dir, manifest)) planes.push_back(luminance(load_png(path)));
  if (planes.empty()) throw IoError("no PNG images found in " + dir.string());
  return TrainingCorpus(std::move(planes), options);
}

const LrHrPair* TrainingCorpus::pair_for(std::size_t source, std::size_t variant,
                                         std::size_t scale) {
  const auto key = std::make_tuple(source, variant, scale);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second.get();

  std::unique_ptr<LrHrPair> pair;
  const ImagePlane& image = images_[source];
  auto built = options_.augment ? make_pair(augment_variant(image, variant, source).plane, scale)
                                : make_pair(image, scale);
  if (built) pair = std::make_unique<LrHrPair>(std::move(*built));

  if (cache_order_.size() >= options_.cache_capacity && !cache_order_.empty()) {
    cache_.erase(cache_order_.front());
    cache_order_.erase(cache_order_.begin());
  }
  cache_order_.push_back(key);
  return cache_.emplace(key, std::move(pair)).first->second.get();
}

template <class T>
Batch<T> TrainingCorpus::sample_batch(const PatchSpec& spec, std::size_t batch,
                                      std::mt19937_64& rng) {
  spec.validate();
  if (batch == 0) throw UsageError("sample_batch: batch size must be >= 1");
  const std::size_t l = spec.lr_size;
  const std::size_t hl = spec.hr_size;
  Batch<T> out{BasicTensor<T>({batch, 1, l, l}), BasicTensor<T>({batch, 1, hl, hl})};
  std::uniform_int_distribution<std::size_t> pick_source(0, images_.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_variant(0, variant_count() - 1);

  const std::size_t max_attempts = 1000 * batch;
  std::size_t attempts = 0;
  for (std::size_t i = 0; i < batch;) {
    if (++attempts > max_attempts) {
      throw IoError("training corpus: no image is large enough for " + std::to_string(l) +
                    "px LR patches at scale " + std::to_string(spec.scale));
    }
    const std::size_t source = pick_source(rng);
    const std::size_t variant = pick_variant(rng);
    const LrHrPair* pair = pair_for(source, variant, spec.scale);
    if (!pair || pair->lr.height < l || pair->lr.width < l) continue;
    std::uniform_int_distribution<std::size_t> rows(0, pair->lr.height - l);
    std::uniform_int_distribution<std::size_t> cols(0, pair->lr.width - l);
    const std::size_t r = rows(rng);
    const std::size_t c = cols(rng);
    const PatchSample s = extract_patch(*pair, spec, r, c);
    std::copy(s.lr.samples.begin(), s.lr.samples.end(), out.lr.plane(i, 0));
    std::copy(s.hr.samples.begin(), s.hr.samples.end(), out.hr.plane(i, 0));
    ++i;
  }
  return out;
}

template Batch<float> TrainingCorpus::sample_batch(const PatchSpec&, std::size_t, std::mt19937_64&);
template Batch<double> TrainingCorpus::sample_batch(const PatchSpec&, std::size_t, std::mt19937_64&);

}  // namespace idn
