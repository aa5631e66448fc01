// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geometry/point_cloud.hpp"
#include "losses/losses.hpp"
#include "models/networks.hpp"
#include "models/parameters.hpp"
#include "trainer/checkpoint.hpp"
#include "trainer/config.hpp"
#include "trainer/optimizer.hpp"

namespace olat {

struct StepRecord {
  std::int64_t step = 0;
  losses::LossBreakdown losses;
  double wall_seconds = 0.0;
  double o_mean = 0.0;        // batch mean of o
  double o_mid_mean = 0.0;    // of o'
  double o_small_mean = 0.0;  // of o''
};

/// Tab-separated header and row for train.log. Wall time is excluded so the
/// log is reproducible byte-for-byte; it goes to timing.log instead.
std::string step_log_header();
std::string format_step_record(const StepRecord& r);
StepRecord parse_step_record(const std::string& line);

// ---------------------------------------------------------------------------
// Complete auto-encoder.

struct AutoEncoder {
  models::ParameterSet encoder{models::Role::complete_encoder};
  models::ParameterSet decoder{models::Role::ae_decoder};
};

struct AeStep {
  std::int64_t step = 0;
  double loss = 0.0;  // batch-mean Chamfer reconstruction
};

/// Trains E_c and its decoder on Chamfer reconstruction. `on_step` sees every
/// step; a non-finite loss throws DivergenceError with `last_finite` (when
/// given) holding the parameters before the failing step.
AutoEncoder pretrain_complete_ae(const TrainConfig& cfg, std::span<const PointCloud> complete_set,
                                 const std::function<void(const AeStep&)>& on_step = {},
                                 AutoEncoder* last_finite = nullptr);

// ---------------------------------------------------------------------------
// Main stage.

struct TrainState {
  TrainConfig config;
  models::ParameterSet partial_encoder{models::Role::partial_encoder};
  models::ParameterSet complete_encoder{models::Role::complete_encoder};  // frozen
  models::ParameterSet complete_decoder{models::Role::complete_decoder};
  models::ParameterSet partial_decoder{models::Role::partial_decoder};
  models::ParameterSet point_discriminator{models::Role::point_discriminator};
  models::ParameterSet code_discriminator{models::Role::code_discriminator};
  Adam adam_partial_encoder, adam_complete_decoder, adam_partial_decoder;
  Adam adam_point_discriminator, adam_code_discriminator;
  std::int64_t step = 0;  // completed generator steps
};

/// Fresh networks seeded from cfg.seed. The complete encoder comes from the
/// pretrained auto-encoder; without one (code D disabled) it is freshly
/// initialized. With init_dc_from_ae the auto-encoder decoder seeds D_c.
TrainState init_train_state(const TrainConfig& cfg, const AutoEncoder* ae = nullptr);

/// One discriminator phase (cfg.d_steps updates) followed by one generator
/// update. `partials` and `completes` must have equal, non-zero size; they
/// are resampled to the configured sizes inside. Throws DivergenceError on a
/// non-finite loss or parameter, leaving `state` unchanged.
StepRecord train_step(TrainState& state, std::span<const PointCloud> partials,
                      std::span<const PointCloud> completes);

/// Latent code swapping for one pair of series members:
/// chamfer(D_p(fuse(z, o')), P') + chamfer(D_p(fuse(z', o)), P).
/// Rows of z/o/z_mid/o_mid are samples; `p` and `p_mid` hold each sample's
/// point matrices. Returns the batch mean.
ad::Var swap_pass(const models::BoundParams& partial_decoder, const TrainConfig& cfg,
                  const ad::Var& z, const ad::Var& o, const ad::Var& z_mid, const ad::Var& o_mid,
                  std::span<const ad::Var> p, std::span<const ad::Var> p_mid);

/// Critic scores on `fake` plus the per-sample input-gradient norm at the
/// penalty points: the fakes themselves, or per-sample real/fake interpolates
/// drawn from `interp_seed`. The norm keeps its graph for the critic update.
struct PenalizedScores {
  ad::Var d_fake;
  ad::Var grad_norm;
};
PenalizedScores penalized_scores(const std::function<ad::Var(const ad::Var&)>& score, const ad::Matrix& fake,
                                 const ad::Matrix& real, const ad::Offsets& offsets, GpMode mode,
                                 std::uint64_t interp_seed);

/// Batch composition for step `step` of a partial set of size n: the indices
/// come from a per-epoch permutation.
std::vector<std::size_t> partial_batch_indices(std::uint64_t seed, std::int64_t step, std::size_t n,
                                               std::size_t batch);
std::vector<std::size_t> complete_batch_indices(std::uint64_t seed, std::int64_t step, std::size_t n,
                                                std::size_t batch);
/// Total generator steps for a set of n partials.
std::int64_t planned_steps(const TrainConfig& cfg, std::size_t n_partials);

/// Runs train_step until the planned step count, calling `on_step` after each.
void train_loop(TrainState& state, std::span<const PointCloud> partials,
                std::span<const PointCloud> completes,
                const std::function<void(const TrainState&, const StepRecord&)>& on_step = {});

// ---------------------------------------------------------------------------
// Checkpoints.

Checkpoint make_checkpoint(const TrainState& state);
TrainState restore_train_state(const Checkpoint& ckpt);
Checkpoint make_ae_checkpoint(const TrainConfig& cfg, const AutoEncoder& ae, std::int64_t step);
AutoEncoder restore_autoencoder(const Checkpoint& ckpt);

// ---------------------------------------------------------------------------
// Inference on a trained state.

struct SeriesCodes {
  models::CodePair base, mid, small;
};

SeriesCodes encode_series(const models::ParameterSet& partial_encoder, const TrainConfig& cfg,
                          const OcclusionSeries& series);

/// Completed cloud for a partial input: D_c(z) of its resampled encoding.
PointCloud complete_cloud(const models::ParameterSet& partial_encoder,
                          const models::ParameterSet& complete_decoder, const TrainConfig& cfg,
                          const PointCloud& partial);

// ---------------------------------------------------------------------------
// Run-directory pipeline used by the CLI and C API.

/// Checkpoint names inside a run directory.
std::string ae_checkpoint_path(const std::string& run_dir, const std::string& category);
std::string category_checkpoint_path(const std::string& run_dir, const std::string& category);

std::string data_dir_for(const TrainConfig& cfg, const std::string& run_dir);

/// Writes config.echo (merged effective config) into the run directory.
void write_config_echo(const TrainConfig& cfg, const std::string& run_dir);

/// Pretrains the complete auto-encoder per category on the train manifest's
/// complete entries; writes ckpt_ae_<cat>.olat and ae_<cat>.log.
void run_pretrain(const TrainConfig& cfg, const std::string& run_dir);

/// Trains one model per category. Writes train.log (every category's
/// StepRecords, prefixed by a category column), timing.log and
/// ckpt_<cat>.olat. With `resume_from`, continues from that
/// checkpoint (single category). On divergence the last finite state is
/// saved as ckpt_<cat>_last_finite.olat and DivergenceError propagates.
void run_train(const TrainConfig& cfg, const std::string& run_dir,
               const std::string& resume_from = {});

}  // namespace olat
