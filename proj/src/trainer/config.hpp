// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "models/networks.hpp"

namespace olat {

enum class RankingMode { npair, triplet, none };
enum class GpMode { fake, interpolate };
enum class PartialMode { halfspace, viewpoint };

std::string_view to_string(RankingMode m);
std::string_view to_string(GpMode m);
std::string_view to_string(PartialMode m);

/// Every hyperparameter, switch, seed and path of a run. Defaults are the
/// full-scale values; configs/toy.cfg holds the desk-scale overrides.
struct TrainConfig {
  // Latent space and losses.
  int d = 96;
  int K = 500;
  int k_degrade = 5;
  double gamma = 100.0;
  double beta = 10.0;
  double lambda_gp = 1.0;
  models::FusionMode fusion_mode = models::FusionMode::multiply;
  RankingMode ranking = RankingMode::npair;
  double triplet_delta = 5.0;
  GpMode gp_mode = GpMode::fake;
  bool enable_point_d = true;
  bool enable_code_d = true;
  bool enable_swap = true;

  // Optimisation.
  double lr = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 16;
  int epochs = 500;
  int max_steps = 0;  // 0: no cap beyond epochs
  int d_steps = 1;    // discriminator updates per generator update
  double grad_clip = 10.0;  // global-norm clip per network group; 0 disables
  std::uint64_t seed = 0;

  // Complete auto-encoder pretraining.
  int ae_steps = 2000;
  double ae_lr = 1e-4;
  int ae_batch_size = 16;
  bool init_dc_from_ae = false;

  // Architecture.
  int input_points = 2048;
  int output_points = 2048;
  models::EncoderVariant encoder_variant = models::EncoderVariant::pointwise_mlp;
  std::vector<int> encoder_widths{64, 128, 256};
  int k_graph = 8;
  std::vector<int> decoder_widths{256, 512};
  std::vector<int> point_d_widths{64, 128};
  std::vector<int> point_d_head{128};
  std::vector<int> code_d_widths{128, 64};
  double d_negative_slope = 0.2;

  // Synthetic data.
  std::vector<std::string> categories{"chair_like"};
  int partial_per_category = 200;
  int complete_per_category = 200;
  int eval_per_category = 20;
  int cloud_points = 2048;
  PartialMode partial_mode = PartialMode::halfspace;
  double severity_min = 0.2;
  double severity_max = 0.5;
  std::uint64_t data_seed = 1;

  // Evaluation and bookkeeping.
  double f1_tau = 0.01;
  int ckpt_every = 0;  // 0: final checkpoint only
  std::string data_dir;  // empty: <run_dir>/data

  models::EncoderConfig encoder_config() const;
  models::DecoderConfig complete_decoder_config() const;
  models::DecoderConfig partial_decoder_config() const;
  models::PointDiscriminatorConfig point_discriminator_config() const;
  models::CodeDiscriminatorConfig code_discriminator_config() const;

  /// Throws ConfigError when a value is out of range.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Sets one field from its textual value. Unknown keys and unparsable values
/// throw ConfigError.
void set_config_value(TrainConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const TrainConfig& cfg, std::string_view key);
std::vector<std::string> config_keys();

/// Applies `key = value` lines; blank lines and `#` comments are ignored.
void apply_config_text(TrainConfig& cfg, std::string_view text);
void apply_config_file(TrainConfig& cfg, const std::string& path);
/// Applies a single `key=value` override.
void apply_override(TrainConfig& cfg, std::string_view assignment);

/// Every field as `key = value`, one per line, in a fixed order. Parsing the
/// echo reproduces the config exactly.
std::string config_echo(const TrainConfig& cfg);

}  // namespace olat
