// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geometry/point_cloud.hpp"
#include "metrics/metrics.hpp"
#include "models/parameters.hpp"
#include "trainer/config.hpp"

namespace olat {

struct EvalItem {
  std::string category;
  PointCloud partial;
  std::optional<PointCloud> truth;
};

struct ScoredItem {
  std::string category;
  PointCloud partial;
  PointCloud predicted;
  std::optional<PointCloud> truth;
};

/// Aggregates metrics per category and overall. CD and F1 are reported only
/// when every item of the group has ground truth; otherwise the group is
/// scored by UCD (and MMD) alone. MMD references are the ground truths, or
/// `extra_references` for categories without them.
metrics::MetricReport score_predictions(std::span<const ScoredItem> items, double tau,
                                        std::span<const EvalItem> extra_references = {});

/// Completes every item with E_p and D_c and scores the results.
metrics::MetricReport evaluate(const models::ParameterSet& partial_encoder,
                               const models::ParameterSet& complete_decoder, const TrainConfig& cfg,
                               std::span<const EvalItem> items);

/// Reads an eval manifest (default: <data_dir>/eval.manifest), pairing the
/// n-th partial with the n-th ground truth of its category. Complete entries
/// become MMD references.
std::vector<EvalItem> load_eval_items(const std::string& manifest_path, std::vector<EvalItem>* references = nullptr);

/// Evaluates ckpt_<cat>.olat for every category of the eval manifest and
/// writes report.csv into the run directory.
metrics::MetricReport run_eval(const TrainConfig& cfg, const std::string& run_dir,
                               const std::string& manifest_path = {});

/// Completes a single cloud file or every partial entry of a manifest.
/// Single input: writes `output` (default <run_dir>/completed.pcb) using
/// `checkpoint` (default ckpt_<first category>.olat). Manifest input: writes
/// <output or run_dir/completions>/<category>/<stem>.pcb using each
/// category's checkpoint unless `checkpoint` is given. With
/// projection_panel > 0 a .ppm projection is written next to every output.
/// Returns the written cloud paths.
std::vector<std::string> run_complete(const TrainConfig& cfg, const std::string& run_dir, const std::string& input,
                                      const std::string& checkpoint = {}, const std::string& output = {},
                                      int projection_panel = 0);

}  // namespace olat
