// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "geometry/point_cloud.hpp"

namespace olat::io {

/// Binary cloud layout: "PCB1", u32 point count, then count x 3 float32, all
/// little-endian. Coordinates are rounded to float32 on write.
inline constexpr char kCloudMagic[] = "PCB1";

enum class CloudFormat { binary, ascii };

std::vector<std::byte> encode_cloud_binary(const PointCloud& cloud);
/// One `x y z` line per point, printed with round-trip precision.
std::string encode_cloud_ascii(const PointCloud& cloud);

/// Detects the format from the magic. Throws FormatError with the byte offset
/// of the first malformed or missing field.
PointCloud decode_cloud(std::span<const std::byte> bytes);

/// `.xyz` / `.txt` paths are written as ASCII, anything else as binary.
CloudFormat format_for_path(const std::string& path);

void write_cloud(const std::string& path, const PointCloud& cloud);
void write_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format);
PointCloud read_cloud(const std::string& path);

}  // namespace olat::io
