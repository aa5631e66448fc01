// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geometry/point_cloud.hpp"

namespace olat::datagen {

/// RGB raster, row-major, 3 bytes per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

/// Three side-by-side orthographic scatter panels (XY, XZ, ZY) of a cloud in
/// [-1, 1]^3. An optional overlay (e.g. the partial input) is drawn in a
/// second colour on top.
Image render_projection(const PointCloud& cloud, int panel_size = 256,
                        const PointCloud* overlay = nullptr);

/// Binary PPM (P6).
void write_ppm(const std::string& path, const Image& image);

}  // namespace olat::datagen
