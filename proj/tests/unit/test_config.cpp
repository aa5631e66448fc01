// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>

#include "common/error.hpp"
#include "test_util.hpp"
#include "trainer/config.hpp"

namespace olat {
namespace {

TEST(Config, FullScaleDefaults) {
  const TrainConfig c;
  EXPECT_EQ(c.d, 96);
  EXPECT_EQ(c.K, 500);
  EXPECT_EQ(c.k_degrade, 5);
  EXPECT_EQ(c.gamma, 100.0);
  EXPECT_EQ(c.beta, 10.0);
  EXPECT_EQ(c.lambda_gp, 1.0);
  EXPECT_EQ(c.lr, 1e-4);
  EXPECT_EQ(c.batch_size, 16);
  EXPECT_EQ(c.epochs, 500);
  EXPECT_EQ(c.adam_beta1, 0.9);
  EXPECT_EQ(c.adam_beta2, 0.999);
  EXPECT_EQ(c.input_points, 2048);
  EXPECT_EQ(c.output_points, 2048);
  EXPECT_EQ(c.fusion_mode, models::FusionMode::multiply);
  EXPECT_EQ(c.ranking, RankingMode::npair);
  EXPECT_EQ(c.gp_mode, GpMode::fake);
  EXPECT_TRUE(c.enable_point_d && c.enable_code_d && c.enable_swap);
  EXPECT_EQ(c.d_steps, 1);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, EchoContainsLossWeights) {
  const auto echo = config_echo(TrainConfig{});
  EXPECT_NE(echo.find("gamma = 100\n"), std::string::npos);
  EXPECT_NE(echo.find("beta = 10\n"), std::string::npos);
  EXPECT_NE(echo.find("lambda_gp = 1\n"), std::string::npos);
  EXPECT_NE(echo.find("k_degrade = 5\n"), std::string::npos);
}

TEST(Config, EchoRoundTripsExactly) {
  TrainConfig c;
  apply_config_text(c, "lr = 0.000123456789012345\nfusion_mode = concat\nencoder_widths = 8, 16,32\n"
                       "categories = box,sphere\nseed = 18446744073709551615\ngp_mode = interpolate\n"
                       "enable_swap = off\ndata_dir = /tmp/some where\n");
  TrainConfig d;
  apply_config_text(d, config_echo(c));
  EXPECT_EQ(c, d);
  EXPECT_EQ(config_echo(c), config_echo(d));
  EXPECT_EQ(d.encoder_widths, (std::vector<int>{8, 16, 32}));
  EXPECT_EQ(d.seed, 18446744073709551615ull);
  EXPECT_EQ(d.data_dir, "/tmp/some where");
}

TEST(Config, EveryKeyGetsAndSetsItsOwnEcho) {
  const TrainConfig c;
  for (const auto& key : config_keys()) {
    TrainConfig d;
    EXPECT_NO_THROW(set_config_value(d, key, get_config_value(c, key))) << key;
    EXPECT_EQ(c, d) << key;
  }
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  TrainConfig c;
  EXPECT_THROW(set_config_value(c, "gama", "1"), ConfigError);
  EXPECT_THROW(set_config_value(c, "batch_size", "sixteen"), ConfigError);
  EXPECT_THROW(set_config_value(c, "batch_size", "16x"), ConfigError);
  EXPECT_THROW(set_config_value(c, "fusion_mode", "divide"), ConfigError);
  EXPECT_THROW(set_config_value(c, "enable_swap", "maybe"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "no equals sign here\n"), ConfigError);
  EXPECT_THROW(apply_override(c, "lr"), ConfigError);
  EXPECT_THROW(get_config_value(c, "nope"), ConfigError);
  EXPECT_EQ(c, TrainConfig{});
}

TEST(Config, ValidationCatchesRanges) {
  auto bad = [](const char* key, const char* value) {
    TrainConfig c;
    set_config_value(c, key, value);
    return c;
  };
  EXPECT_THROW(bad("batch_size", "0").validate(), ConfigError);
  EXPECT_THROW(bad("lr", "-1").validate(), ConfigError);
  EXPECT_THROW(bad("triplet_delta", "0").validate(), ConfigError);
  EXPECT_THROW(bad("lambda_gp", "-0.5").validate(), ConfigError);
  EXPECT_THROW(bad("f1_tau", "0").validate(), ConfigError);
  EXPECT_THROW(bad("severity_max", "0.95").validate(), ConfigError);
}

TEST(Config, FileThenOverridesPrecedence) {
  const auto dir = olat::testing::temp_dir("config_precedence");
  const auto path = dir + "/run.cfg";
  std::ofstream(path) << "# comment\n\nlr = 0.5\nbatch_size = 4\n  K = 7  \n";
  TrainConfig c;
  apply_config_file(c, path);
  apply_override(c, "batch_size=9");
  EXPECT_EQ(c.lr, 0.5);
  EXPECT_EQ(c.batch_size, 9);
  EXPECT_EQ(c.K, 7);
  EXPECT_THROW(apply_config_file(c, dir + "/missing.cfg"), ConfigError);
}

TEST(Config, ToyConfigLoads) {
  TrainConfig c;
  apply_config_file(c, OLAT_SOURCE_DIR "/configs/toy.cfg");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.input_points, 512);
  EXPECT_EQ(c.output_points, 512);
  EXPECT_EQ(c.K, 64);
  EXPECT_LE(c.epochs, 200);
  EXPECT_EQ(c.partial_per_category, 50);
  EXPECT_EQ(c.categories.size(), 1u);
}

TEST(Config, FullScaleConfigMatchesDefaults) {
  TrainConfig c;
  apply_config_file(c, OLAT_SOURCE_DIR "/configs/full.cfg");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.categories.size(), 5u);
  TrainConfig expected;
  expected.categories = c.categories;
  EXPECT_EQ(c, expected);
}

}  // namespace
}  // namespace olat
