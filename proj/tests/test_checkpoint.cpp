// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstring>

#include "fixtures.hpp"
#include "idn/checkpoint.hpp"

using namespace idn;
using idn::testing::read_bytes;
using idn::testing::TempDir;
using idn::testing::write_bytes;

namespace {

std::uint32_t u32_at(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

}  // namespace

TEST(Checkpoint, RoundTripDefaultConfig) {
  TempDir dir;
  IdnConfig c;
  c.scale = 4;
  const auto params = init_params<float>(c, 9);
  save_checkpoint(dir / "a.ckpt", c, params);
  const Checkpoint loaded = load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(loaded.config, c);
  EXPECT_EQ(loaded.params, params);
  EXPECT_FALSE(std::filesystem::exists(dir / "a.ckpt.tmp"));
}

TEST(Checkpoint, HeaderLayoutIsLittleEndian) {
  TempDir dir;
  const IdnConfig c = tiny_config(3);
  save_checkpoint(dir / "t.ckpt", c, ModelParams<float>(c));
  const std::string b = read_bytes(dir / "t.ckpt");
  ASSERT_GT(b.size(), 40u);
  EXPECT_EQ(b.substr(0, 4), "IDNW");
  EXPECT_EQ(u32_at(b, 4), 1u);
  EXPECT_EQ(u32_at(b, 8), 3u);   // scale
  EXPECT_EQ(u32_at(b, 12), 1u);  // blocks
  EXPECT_EQ(u32_at(b, 16), 8u);  // d3
  EXPECT_EQ(u32_at(b, 20), 2u);  // d
  EXPECT_EQ(u32_at(b, 24), 4u);  // s
  float slope = 0;
  const std::uint32_t bits = u32_at(b, 36);
  std::memcpy(&slope, &bits, 4);
  EXPECT_EQ(slope, 0.05f);
  // first record: name length then the name
  const std::uint32_t len = u32_at(b, 40);
  EXPECT_EQ(b.substr(44, len), "fblock.conv1.weight");

  // total size: header + per-tensor (4 + name + 16 + 4 * count)
  std::size_t expected = 40;
  ModelParams<float>(c).for_each_tensor([&](const std::string& name, const Tensor& t) {
    expected += 4 + name.size() + 16 + 4 * t.size();
  });
  EXPECT_EQ(b.size(), expected);
}

TEST(Checkpoint, DoubleParamsStoredAsFloat) {
  TempDir dir;
  const IdnConfig c = tiny_config(2);
  const auto p = init_params<double>(c, 4);
  save_checkpoint(dir / "d.ckpt", c, p);
  EXPECT_EQ(load_checkpoint(dir / "d.ckpt").params, p.cast<float>());
}

TEST(Checkpoint, RejectsBadMagicAndVersion) {
  TempDir dir;
  const IdnConfig c = tiny_config(2);
  save_checkpoint(dir / "ok.ckpt", c, ModelParams<float>(c));
  std::string b = read_bytes(dir / "ok.ckpt");

  std::string bad = b;
  bad[3] = 'X';
  write_bytes(dir / "magic.ckpt", bad);
  EXPECT_THROW(load_checkpoint(dir / "magic.ckpt"), IoError);

  bad = b;
  bad[4] = 2;
  write_bytes(dir / "version.ckpt", bad);
  EXPECT_THROW(load_checkpoint(dir / "version.ckpt"), IoError);
}

TEST(Checkpoint, RejectsTruncationAndTrailingData) {
  TempDir dir;
  const IdnConfig c = tiny_config(2);
  save_checkpoint(dir / "ok.ckpt", c, init_params<float>(c, 1));
  const std::string b = read_bytes(dir / "ok.ckpt");
  for (std::size_t cut : {std::size_t{2}, std::size_t{20}, b.size() / 2, b.size() - 1}) {
    write_bytes(dir / "cut.ckpt", b.substr(0, cut));
    EXPECT_THROW(load_checkpoint(dir / "cut.ckpt"), IoError) << cut;
  }
  write_bytes(dir / "extra.ckpt", b + std::string(8, '\0'));
  EXPECT_THROW(load_checkpoint(dir / "extra.ckpt"), IoError);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), IoError);
}

TEST(Checkpoint, OverwriteReplacesAtomically) {
  TempDir dir;
  const IdnConfig c = tiny_config(2);
  save_checkpoint(dir / "x.ckpt", c, init_params<float>(c, 1));
  const auto second = init_params<float>(c, 2);
  save_checkpoint(dir / "x.ckpt", c, second);
  EXPECT_EQ(load_checkpoint(dir / "x.ckpt").params, second);
}
