// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint archive, version OLAT1. Layout (all integers little-endian u32):
//
//   "OLAT1"
//   config_len, config text (key = value lines)
//   section_count
//   per section: tag_len, tag, array_count
//     per array: name_len, name, ndim, dims[ndim], float32 data (LE)
//
// The file must end exactly after the last array.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "models/parameters.hpp"
#include "trainer/config.hpp"
#include "trainer/optimizer.hpp"

namespace olat {

inline constexpr char kCheckpointMagic[] = "OLAT1";

/// A tagged group of arrays: a ParameterSet (tag = role name) or auxiliary
/// state such as optimiser moments.
struct Section {
  std::string tag;
  std::vector<models::ParameterArray> arrays;

  bool operator==(const Section&) const = default;
};

struct Checkpoint {
  TrainConfig config;
  std::vector<Section> sections;

  const Section* find(std::string_view tag) const;
  void put(Section section);
  bool operator==(const Checkpoint&) const = default;
};

Section to_section(const models::ParameterSet& set);
models::ParameterSet to_parameter_set(const Section& section);
/// Looks up the section for `role` and converts it. Throws FormatError if absent.
models::ParameterSet parameter_set(const Checkpoint& ckpt, models::Role role);

Section adam_section(std::string tag, const models::ParameterSet& params, const Adam& adam);
Adam restore_adam(const Section& section, const models::ParameterSet& params);

std::vector<std::byte> serialize(const Checkpoint& ckpt);
/// Throws FormatError with the byte offset of the first malformed field.
Checkpoint deserialize(std::span<const std::byte> bytes);

/// Writes via a temporary file and rename.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Shared little-endian file helpers (also used by the cloud format).
std::vector<std::byte> read_file_bytes(const std::string& path);
void write_file_atomic(const std::string& path, std::span<const std::byte> bytes);

}  // namespace olat
