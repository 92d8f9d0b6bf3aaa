// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "idn/imaging.hpp"
#include "idn/tensor.hpp"

namespace idn {

enum class PatchPhase { Training, FineTuning };

/// LR/HR sub-image sizes. hr_size is always m * lr_size - m + 1.
struct PatchSpec {
  std::size_t scale = 3;
  std::size_t lr_size = 15;
  std::size_t hr_size = 43;
  std::size_t stride = 0;  // unused by random sampling; kept for sliding windows
  PatchPhase phase = PatchPhase::Training;

  /// Spec for an LR size; derives hr_size.
  static PatchSpec make(std::size_t scale, std::size_t lr_size,
                        PatchPhase phase = PatchPhase::Training);
  /// The published sizes per scale (29/39 for x2, 15/26 for x3, 11/19 for x4).
  static PatchSpec standard(std::size_t scale, PatchPhase phase);

  void validate() const;
};

/// One of the 40 augmentations: rescale, then rotate (counter-clockwise),
/// then optionally flip horizontally.
struct AugmentedImage {
  std::size_t source_id = 0;
  int rotation = 0;  // degrees: 0, 90, 180, 270
  bool hflip = false;
  double rescale = 1.0;
  ImagePlane plane;
};

inline constexpr double kAugmentScales[5] = {1.0, 0.9, 0.8, 0.7, 0.6};
inline constexpr std::size_t kAugmentVariants = 40;

ImagePlane rotate90(const ImagePlane& plane, int quarter_turns);
ImagePlane flip_horizontal(const ImagePlane& plane);

/// Variant `index` in [0, 40), ordered scale-major, then rotation, then flip.
AugmentedImage augment_variant(const ImagePlane& image, std::size_t index,
                               std::size_t source_id = 0);

/// All 40 variants in deterministic order (identity first).
std::vector<AugmentedImage> augment(const ImagePlane& image, std::size_t source_id = 0);

struct LrHrPair {
  std::size_t scale = 0;
  ImagePlane lr;
  ImagePlane hr;
};

/// Trims hr to multiples of m (bottom/right) and degrades it with an
/// antialiased bicubic downscale. Returns nullopt when hr is smaller than m.
std::optional<LrHrPair> make_pair(const ImagePlane& hr, std::size_t m);

struct PatchSample {
  ImagePlane lr;
  ImagePlane hr;
};

/// LR window at (row, col) and its label: the HR window at (m*row, m*col)
/// of side m*l, trimmed by floor((m-1)/2) leading and the rest trailing.
PatchSample extract_patch(const LrHrPair& pair, const PatchSpec& spec, std::size_t row,
                          std::size_t col);

/// Random-position patch stream over one pair.
class PatchStream {
 public:
  PatchStream(const LrHrPair& pair, const PatchSpec& spec, std::uint64_t seed);
  PatchSample next();

 private:
  const LrHrPair* pair_;
  PatchSpec spec_;
  std::mt19937_64 rng_;
};

std::vector<PatchSample> extract_patches(const LrHrPair& pair, const PatchSpec& spec,
                                         std::uint64_t seed, std::size_t count);

/// PNG files of a directory in lexicographic order, or the manifest's order
/// (one path per line, relative paths resolved against the manifest's
/// directory) when a manifest is given.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir,
                                               const std::optional<std::filesystem::path>& manifest);

template <class T>
struct Batch {
  BasicTensor<T> lr;  // (N, 1, l, l)
  BasicTensor<T> hr;  // (N, 1, m*l - m + 1, ...)
};

/// Training corpus of luminance planes with lazily built augmented pairs.
class TrainingCorpus {
 public:
  struct Options {
    bool augment = true;
    std::size_t cache_capacity = 512;
  };

  TrainingCorpus(std::vector<ImagePlane> images, Options options);
  TrainingCorpus(std::vector<ImagePlane> images);

  /// Loads the luminance of every listed image. Throws IoError when the
  /// list is empty or a file is unreadable.
  static TrainingCorpus from_directory(const std::filesystem::path& dir,
                                       const std::optional<std::filesystem::path>& manifest,
                                       Options options);

  std::size_t image_count() const { return images_.size(); }
  std::size_t variant_count() const { return options_.augment ? kAugmentVariants : 1; }

  /// Draws `batch` samples: random source, variant and position. Variants
  /// too small for the patch are redrawn; throws IoError if none fits.
  template <class T>
  Batch<T> sample_batch(const PatchSpec& spec, std::size_t batch, std::mt19937_64& rng);

 private:
  const LrHrPair* pair_for(std::size_t source, std::size_t variant, std::size_t scale);

  std::vector<ImagePlane> images_;
  Options options_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::unique_ptr<LrHrPair>> cache_;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> cache_order_;
};

}  // namespace idn
