// SPDX-License-Identifier: Apache-2.0
#include "idn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace idn {
namespace {

template <class U>
void put_le(std::ostream& out, U v) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <class U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw IoError("checkpoint: unexpected end of file");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxExtent = 1u << 20;

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
void write_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
std::uint32_t read_u32(std::istream& in) { return get_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return get_le<std::uint64_t>(in); }
float read_f32(std::istream& in) { return std::bit_cast<float>(get_le<std::uint32_t>(in)); }

void write_tensor_record(std::ostream& out, const std::string& name, const Tensor& value) {
  write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  const Shape& s = value.shape();
  for (std::size_t e : {s.n, s.c, s.h, s.w}) write_u32(out, static_cast<std::uint32_t>(e));
  for (float v : value.data()) write_f32(out, v);
}

TensorRecord read_tensor_record(std::istream& in) {
  TensorRecord rec;
  const std::uint32_t len = read_u32(in);
  if (len == 0 || len > kMaxNameLength) throw IoError("checkpoint: bad record name length");
  rec.name.resize(len);
  if (!in.read(rec.name.data(), len)) throw IoError("checkpoint: unexpected end of file");
  std::uint32_t ext[4];
  for (auto& e : ext) {
    e = read_u32(in);
    if (e == 0 || e > kMaxExtent) throw IoError("checkpoint: bad extent in " + rec.name);
  }
  const Shape shape{ext[0], ext[1], ext[2], ext[3]};
  std::vector<float> values(shape.numel());
  for (float& v : values) v = read_f32(in);
  rec.value = Tensor(shape, std::move(values));
  return rec;
}

template <class T>
void save_checkpoint(const std::filesystem::path& path, const IdnConfig& config,
                     const ModelParams<T>& params) {
  config.validate();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(kCheckpointMagic, 4);
    write_u32(out, kCheckpointVersion);
    for (std::size_t v : {config.scale, config.num_dblocks, config.d3, config.d, config.s,
                          config.groups, config.feat_channels}) {
      write_u32(out, static_cast<std::uint32_t>(v));
    }
    write_f32(out, config.lrelu_slope);
    params.for_each_tensor([&](const std::string& name, const BasicTensor<T>& t) {
      write_tensor_record(out, name, t.template cast<float>());
    });
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw IoError(path.string() + ": not an IDN checkpoint (bad magic)");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion) {
    throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }

  IdnConfig config;
  config.scale = read_u32(in);
  config.num_dblocks = read_u32(in);
  config.d3 = read_u32(in);
  config.d = read_u32(in);
  config.s = read_u32(in);
  config.groups = read_u32(in);
  config.feat_channels = read_u32(in);
  config.lrelu_slope = read_f32(in);

  std::vector<TensorRecord> records;
  while (in.peek() != std::char_traits<char>::eof()) records.push_back(read_tensor_record(in));

  // The RBlock kernel size is carried by its weight record.
  for (const auto& rec : records) {
    if (rec.name == std::string(kRBlockName) + ".weight") config.rblock_kernel = rec.value.h();
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": " + e.what());
  }

  Checkpoint ckpt{config, ModelParams<float>(config)};
  std::size_t index = 0;
  bool ok = true;
  ckpt.params.for_each_tensor([&](const std::string& name, Tensor& t) {
    if (!ok) return;
    if (index >= records.size() || records[index].name != name ||
        records[index].value.shape() != t.shape()) {
      ok = false;
      return;
    }
    t = std::move(records[index].value);
    ++index;
  });
  if (!ok || index != records.size()) {
    throw IoError(path.string() + ": tensor records do not match the stored configuration");
  }
  return ckpt;
}

template void save_checkpoint(const std::filesystem::path&, const IdnConfig&,
                              const ModelParams<float>&);
template void save_checkpoint(const std::filesystem::path&, const IdnConfig&,
                              const ModelParams<double>&);

}  // namespace idn
