// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geometry/point_cloud.hpp"
#include "trainer/config.hpp"

namespace olat::datagen {

inline constexpr int kManifestVersion = 1;

enum class EntryRole { partial, complete, ground_truth };

std::string_view to_string(EntryRole r);
std::optional<EntryRole> entry_role_from_string(std::string_view name);

struct ManifestEntry {
  EntryRole role = EntryRole::partial;
  std::string category;
  std::string path;  // relative to the manifest's directory unless absolute

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::string split;
  std::uint64_t seed = 0;
  int version = kManifestVersion;
  std::vector<ManifestEntry> entries;

  /// Entries with the given role (and category, when non-empty), in file order.
  std::vector<ManifestEntry> select(EntryRole role, std::string_view category = {}) const;
  /// Categories in first-appearance order.
  std::vector<std::string> categories() const;

  /// Throws InvalidArgument when the unpaired or ground-truth rules are broken.
  void validate() const;

  bool operator==(const DatasetManifest&) const = default;
};

std::string format_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest(std::string_view text);

/// Atomic write (temporary file, then rename).
void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

/// Resolves an entry path against the directory holding `manifest_path`.
std::string resolve_entry_path(const std::string& manifest_path, const std::string& entry_path);

/// Instance identifier encoded in an entry's file name (`<role>_<id>.pcb`).
std::optional<std::uint64_t> instance_id(const ManifestEntry& e);

struct BuiltDataset {
  std::string train_manifest;
  std::string eval_manifest;
};

/// Generates the synthetic train/eval splits under `dir`:
///   train/<cat>/partial_<id>.pcb, train/<cat>/complete_<id>.pcb,
///   eval/<cat>/partial_<id>.pcb,  eval/<cat>/gt_<id>.pcb,
/// with train.manifest and eval.manifest written last. Partial, complete and
/// eval instances draw from disjoint id ranges.
BuiltDataset build_dataset(const TrainConfig& cfg, const std::string& dir);

/// Loads every cloud of `role` (and category) from a manifest.
std::vector<PointCloud> load_clouds(const std::string& manifest_path, const DatasetManifest& m,
                                    EntryRole role, std::string_view category = {});

}  // namespace olat::datagen
