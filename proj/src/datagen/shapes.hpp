// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "common/rng.hpp"
#include "geometry/point_cloud.hpp"
#include "trainer/config.hpp"

namespace olat::datagen {

enum class Category { box, cylinder, sphere, lamp_like, chair_like };

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view name);

/// Parametric shape. `params` are category-specific positive sizes:
///   box:        half extents (x, y, z)
///   cylinder:   radius, half height
///   sphere:     radius
///   lamp_like:  base radius, base half thickness, pole radius, pole height,
///               shade radius, shade half height
///   chair_like: seat half width, seat half thickness, seat half depth,
///               seat height, back height, leg half size
/// `yaw` rotates about the vertical (y) axis.
struct ShapeSpec {
  Category category = Category::sphere;
  std::vector<double> params;
  double yaw = 0.0;
  std::size_t sample_count = 2048;
};

/// Draws sizes within each category's documented ranges and a random yaw.
ShapeSpec random_shape_spec(Category category, std::size_t sample_count, Rng& rng);

/// Area-uniform surface samples. The shape is centred on its bounding box and
/// scaled by its bounding radius, so every sample lies in the unit ball.
PointCloud sample_shape(const ShapeSpec& spec, std::uint64_t seed);

/// Centre and scale applied by sample_shape (before the yaw rotation):
/// world = R_yaw * (local - centre) / radius.
struct ShapeFrame {
  Point3 centre{};
  double radius = 1.0;
};
ShapeFrame shape_frame(const ShapeSpec& spec);

/// Drops a `severity` fraction of points: on one side of a random plane
/// (halfspace) or those facing away from a random view direction (viewpoint).
/// Output is a subset of the input in input order. Requires 0 < severity <= 0.9.
PointCloud make_partial(const PointCloud& complete, PartialMode mode, double severity,
                        std::uint64_t seed);

}  // namespace olat::datagen
