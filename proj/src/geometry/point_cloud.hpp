// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace olat {

using Point3 = std::array<double, 3>;

/// Ordered set of 3-D points stored as a flat row-major xyz array.
/// Every coordinate is finite; construction from non-finite data throws.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<double> xyz);
  explicit PointCloud(std::span<const Point3> points);

  static PointCloud from_points(std::initializer_list<Point3> points) {
    return PointCloud(std::span<const Point3>(points.begin(), points.size()));
  }

  std::size_t size() const noexcept { return xyz_.size() / 3; }
  bool empty() const noexcept { return xyz_.empty(); }

  Point3 operator[](std::size_t i) const noexcept {
    return {xyz_[3 * i], xyz_[3 * i + 1], xyz_[3 * i + 2]};
  }

  std::span<const double> coords() const noexcept { return xyz_; }
  const std::vector<double>& xyz() const noexcept { return xyz_; }

  /// Points at the given indices, in the given order.
  PointCloud select(std::span<const std::uint32_t> indices) const;

  bool operator==(const PointCloud&) const = default;

 private:
  std::vector<double> xyz_;
};

/// Per-query k nearest neighbours. Row `q` of `indices`/`sq_dists` holds the
/// k results of query point q, ascending by (squared distance, index).
struct KnnResult {
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> sq_dists;

  std::span<const std::uint32_t> indices_of(std::size_t q) const {
    return std::span(indices).subspan(q * k, k);
  }
  std::span<const double> sq_dists_of(std::size_t q) const {
    return std::span(sq_dists).subspan(q * k, k);
  }
};

/// Exact k-nearest-neighbour search over flat xyz arrays. Ties are broken by
/// the lower reference index.
KnnResult knn(std::span<const double> query_xyz, std::span<const double> reference_xyz,
              std::size_t k);
KnnResult knn(const PointCloud& query, const PointCloud& reference, std::size_t k);

/// Nearest reference index per query point (k = 1 fast path).
std::vector<std::uint32_t> nearest(std::span<const double> query_xyz,
                                   std::span<const double> reference_xyz,
                                   std::vector<double>* sq_dists = nullptr);

struct Normalized {
  PointCloud cloud;
  Point3 centroid{};
  double scale = 1.0;
};

/// Centres the cloud on its centroid and divides by the largest absolute
/// coordinate, so the result fits [-1, 1]^3.
Normalized normalize(const PointCloud& cloud);
PointCloud denormalize(const PointCloud& cloud, const Point3& centroid, double scale);

/// Nested partial clouds: mid = base minus the K points nearest the seed point,
/// small = base minus the 2K nearest. Remaining points keep their base order.
struct OcclusionSeries {
  PointCloud base;
  PointCloud mid;
  PointCloud small;
  std::size_t removal_count = 0;
  std::size_t seed_point_index = 0;
};

OcclusionSeries make_occlusion_series(const PointCloud& base, std::size_t removal_count,
                                      std::uint64_t rng_seed);
OcclusionSeries make_occlusion_series_at(const PointCloud& base, std::size_t removal_count,
                                         std::size_t seed_point_index);

/// Sorted, deduplicated union over partial points of their k nearest predicted points.
std::vector<std::uint32_t> degrade_indices(std::span<const double> predicted_xyz,
                                           std::span<const double> partial_xyz, std::size_t k);
PointCloud degrade(const PointCloud& predicted, const PointCloud& partial, std::size_t k);

/// Exactly `count` points. Subsamples without replacement (keeping input order)
/// when the cloud is large enough; otherwise keeps every point and pads with
/// draws with replacement.
PointCloud resample(const PointCloud& cloud, std::size_t count, std::uint64_t rng_seed);

}  // namespace olat
