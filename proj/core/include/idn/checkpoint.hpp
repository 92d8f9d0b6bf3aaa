// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "idn/model.hpp"

namespace idn {

// Checkpoint layout (all integers little-endian u32, floats IEEE f32):
//   "IDNW" | version | scale num_dblocks d3 d s groups feat_channels |
//   lrelu_slope(f32) | records...
// Each record: name length, UTF-8 name, 4 extents, raw f32 data. Records
// follow canonical layer order, weight before bias.
inline constexpr char kCheckpointMagic[4] = {'I', 'D', 'N', 'W'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  IdnConfig config;
  ModelParams<float> params;
};

/// Writes atomically (temp file + rename); parameters are stored as f32.
template <class T>
void save_checkpoint(const std::filesystem::path& path, const IdnConfig& config,
                     const ModelParams<T>& params);

/// Throws IoError on unknown magic/version, truncation or layout mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct TensorRecord {
  std::string name;
  Tensor value;
};

void write_tensor_record(std::ostream& out, const std::string& name, const Tensor& value);
TensorRecord read_tensor_record(std::istream& in);

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);

}  // namespace idn
