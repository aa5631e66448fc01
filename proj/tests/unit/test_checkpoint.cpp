// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <limits>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "test_util.hpp"
#include "trainer/checkpoint.hpp"

namespace olat {
namespace {

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.config.lr = 3.25e-4;
  c.config.fusion_mode = models::FusionMode::add;
  c.config.categories = {"box", "lamp_like"};
  Section s{"partial_encoder", {}};
  // Awkward float values: denormals, signed zero, extremes.
  s.arrays.push_back({"w", {2, 3},
                      {0.1f, -0.0f, std::numeric_limits<float>::denorm_min(),
                       std::numeric_limits<float>::max(), -std::numeric_limits<float>::lowest(), 1e-30f}});
  s.arrays.push_back({"b", {4}, {1.0f, 2.0f, 3.0f, 4.5f}});
  c.put(s);
  Section t{"adam.partial_encoder", {{"step", {2}, {7.0f, 0.0f}}}};
  c.put(t);
  return c;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto c = sample_checkpoint();
  const auto bytes = serialize(c);
  ASSERT_EQ(std::memcmp(bytes.data(), "OLAT1", 5), 0);
  const auto d = deserialize(bytes);
  EXPECT_EQ(c, d);
  EXPECT_EQ(serialize(d), bytes);
  const auto& w = d.find("partial_encoder")->arrays[0].data;
  EXPECT_TRUE(std::signbit(w[1]));
  EXPECT_EQ(w[2], std::numeric_limits<float>::denorm_min());
}

TEST(Checkpoint, RandomParameterSetsRoundTrip) {
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    models::ParameterSet set(models::Role::complete_decoder);
    const int arrays = 1 + static_cast<int>(rng.uniform() * 5);
    for (int a = 0; a < arrays; ++a) {
      const auto r = 1 + static_cast<std::uint32_t>(rng.uniform() * 20);
      const auto k = 1 + static_cast<std::uint32_t>(rng.uniform() * 20);
      std::vector<float> data(r * k);
      for (auto& f : data) f = static_cast<float>(rng.normal() * 1e3);
      set.add("fc." + std::to_string(a) + ".weight", {r, k}, std::move(data));
    }
    Checkpoint c;
    c.put(to_section(set));
    const auto d = deserialize(serialize(c));
    EXPECT_TRUE(parameter_set(d, models::Role::complete_decoder) == set);
  }
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = olat::testing::temp_dir("ckpt_file");
  const auto c = sample_checkpoint();
  save_checkpoint(dir + "/a.olat", c);
  EXPECT_EQ(load_checkpoint(dir + "/a.olat"), c);
  EXPECT_THROW(load_checkpoint(dir + "/missing.olat"), IoError);
}

TEST(Checkpoint, BadMagicRejected) {
  auto bytes = serialize(sample_checkpoint());
  bytes[4] = std::byte{'2'};
  EXPECT_THROW(deserialize(bytes), FormatError);
  bytes[4] = std::byte{'1'};
  bytes[0] = std::byte{'X'};
  EXPECT_THROW(deserialize(bytes), FormatError);
}

TEST(Checkpoint, EveryTruncationRejected) {
  const auto bytes = serialize(sample_checkpoint());
  for (std::size_t n = 0; n < bytes.size(); ++n)
    EXPECT_THROW(deserialize(std::span(bytes.data(), n)), FormatError) << "length " << n;
}

TEST(Checkpoint, TrailingBytesRejected) {
  auto bytes = serialize(sample_checkpoint());
  bytes.push_back(std::byte{0});
  EXPECT_THROW(deserialize(bytes), FormatError);
}

TEST(Checkpoint, RandomByteFlipsNeverCrash) {
  const auto clean = serialize(sample_checkpoint());
  Rng rng(5);
  int rejected = 0;
  for (int t = 0; t < 500; ++t) {
    auto bytes = clean;
    const auto at = static_cast<std::size_t>(rng.uniform() * static_cast<double>(bytes.size()));
    bytes[at] ^= static_cast<std::byte>(1 + static_cast<int>(rng.uniform() * 255));
    try {
      (void)deserialize(bytes);
    } catch (const FormatError&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(Checkpoint, MissingRoleIsFormatError) {
  EXPECT_THROW(parameter_set(sample_checkpoint(), models::Role::point_discriminator), FormatError);
}

}  // namespace
}  // namespace olat
