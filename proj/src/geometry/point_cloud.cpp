// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "geometry/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace olat {

namespace {

void check_xyz(std::span<const double> xyz, const char* what) {
  if (xyz.empty()) throw InvalidArgument(std::string(what) + ": point cloud is empty");
  if (xyz.size() % 3 != 0)
    throw InvalidArgument(std::string(what) + ": coordinate count is not a multiple of 3");
}

inline double sq_dist(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

PointCloud::PointCloud(std::vector<double> xyz) : xyz_(std::move(xyz)) {
  if (xyz_.size() % 3 != 0)
    throw InvalidArgument("PointCloud: coordinate count is not a multiple of 3");
  for (double v : xyz_)
    if (!std::isfinite(v)) throw InvalidArgument("PointCloud: non-finite coordinate");
}

PointCloud::PointCloud(std::span<const Point3> points) {
  xyz_.reserve(points.size() * 3);
  for (const auto& p : points) {
    for (double v : p) {
      if (!std::isfinite(v)) throw InvalidArgument("PointCloud: non-finite coordinate");
      xyz_.push_back(v);
    }
  }
}

PointCloud PointCloud::select(std::span<const std::uint32_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * 3);
  for (auto i : indices) {
    if (i >= size()) throw InvalidArgument("PointCloud::select: index out of range");
    out.insert(out.end(), xyz_.begin() + 3 * i, xyz_.begin() + 3 * i + 3);
  }
  PointCloud result;
  result.xyz_ = std::move(out);
  return result;
}

KnnResult knn(std::span<const double> query_xyz, std::span<const double> reference_xyz,
              std::size_t k) {
  check_xyz(query_xyz, "knn");
  check_xyz(reference_xyz, "knn");
  const std::size_t nq = query_xyz.size() / 3;
  const std::size_t nr = reference_xyz.size() / 3;
  if (k == 0) throw InvalidArgument("knn: k must be positive");
  if (k > nr) throw InvalidArgument("knn: k exceeds reference size");

  KnnResult result;
  result.k = k;
  result.indices.resize(nq * k);
  result.sq_dists.resize(nq * k);

  std::vector<double> best_d(k);
  std::vector<std::uint32_t> best_i(k);
  for (std::size_t q = 0; q < nq; ++q) {
    const double* qp = query_xyz.data() + 3 * q;
    std::size_t filled = 0;
    for (std::size_t r = 0; r < nr; ++r) {
      const double d = sq_dist(qp, reference_xyz.data() + 3 * r);
      // References arrive in increasing index order, so an equal distance
      // never displaces an earlier entry.
      if (filled == k && d >= best_d[k - 1]) continue;
      std::size_t pos = filled < k ? filled++ : k - 1;
      while (pos > 0 && best_d[pos - 1] > d) {
        best_d[pos] = best_d[pos - 1];
        best_i[pos] = best_i[pos - 1];
        --pos;
      }
      best_d[pos] = d;
      best_i[pos] = static_cast<std::uint32_t>(r);
    }
    std::copy(best_d.begin(), best_d.end(), result.sq_dists.begin() + q * k);
    std::copy(best_i.begin(), best_i.end(), result.indices.begin() + q * k);
  }
  return result;
}

KnnResult knn(const PointCloud& query, const PointCloud& reference, std::size_t k) {
  return knn(query.coords(), reference.coords(), k);
}

std::vector<std::uint32_t> nearest(std::span<const double> query_xyz,
                                   std::span<const double> reference_xyz,
                                   std::vector<double>* sq_dists) {
  check_xyz(query_xyz, "nearest");
  check_xyz(reference_xyz, "nearest");
  const std::size_t nq = query_xyz.size() / 3;
  const std::size_t nr = reference_xyz.size() / 3;
  std::vector<std::uint32_t> idx(nq);
  if (sq_dists) sq_dists->resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const double* qp = query_xyz.data() + 3 * q;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t bi = 0;
    for (std::size_t r = 0; r < nr; ++r) {
      const double d = sq_dist(qp, reference_xyz.data() + 3 * r);
      if (d < best) {
        best = d;
        bi = static_cast<std::uint32_t>(r);
      }
    }
    idx[q] = bi;
    if (sq_dists) (*sq_dists)[q] = best;
  }
  return idx;
}

Normalized normalize(const PointCloud& cloud) {
  check_xyz(cloud.coords(), "normalize");
  const std::size_t n = cloud.size();
  const auto& xyz = cloud.xyz();
  Point3 c{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) c[a] += xyz[3 * i + a];
  for (auto& v : c) v /= static_cast<double>(n);

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) scale = std::max(scale, std::abs(xyz[3 * i + a] - c[a]));
  if (scale == 0.0) throw DegenerateInput("normalize: all points are identical");

  std::vector<double> out(xyz.size());
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) out[3 * i + a] = (xyz[3 * i + a] - c[a]) / scale;
  return {PointCloud(std::move(out)), c, scale};
}

PointCloud denormalize(const PointCloud& cloud, const Point3& centroid, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("denormalize: scale must be positive");
  std::vector<double> out(cloud.xyz());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int a = 0; a < 3; ++a) out[3 * i + a] = out[3 * i + a] * scale + centroid[a];
  return PointCloud(std::move(out));
}

OcclusionSeries make_occlusion_series_at(const PointCloud& base, std::size_t removal_count,
                                         std::size_t seed_point_index) {
  if (removal_count == 0) throw InvalidArgument("occlusion series: K must be positive");
  if (base.size() <= 2 * removal_count)
    throw InvalidArgument("occlusion series: base must have more than 2K points");
  if (seed_point_index >= base.size())
    throw InvalidArgument("occlusion series: seed index out of range");

  const Point3 seed = base[seed_point_index];
  const auto order = knn(std::span<const double>(seed.data(), 3), base.coords(), 2 * removal_count);

  std::vector<char> removed(base.size(), 0);
  auto keep_remaining = [&] {
    std::vector<std::uint32_t> keep;
    keep.reserve(base.size());
    for (std::uint32_t i = 0; i < base.size(); ++i)
      if (!removed[i]) keep.push_back(i);
    return base.select(keep);
  };

  OcclusionSeries s;
  s.base = base;
  s.removal_count = removal_count;
  s.seed_point_index = seed_point_index;
  for (std::size_t j = 0; j < removal_count; ++j) removed[order.indices[j]] = 1;
  s.mid = keep_remaining();
  for (std::size_t j = removal_count; j < 2 * removal_count; ++j) removed[order.indices[j]] = 1;
  s.small = keep_remaining();
  return s;
}

OcclusionSeries make_occlusion_series(const PointCloud& base, std::size_t removal_count,
                                      std::uint64_t rng_seed) {
  if (base.size() <= 2 * removal_count || removal_count == 0)
    throw InvalidArgument("occlusion series: base must have more than 2K points, K > 0");
  Rng rng(rng_seed);
  return make_occlusion_series_at(base, removal_count, rng.below(base.size()));
}

std::vector<std::uint32_t> degrade_indices(std::span<const double> predicted_xyz,
                                           std::span<const double> partial_xyz, std::size_t k) {
  const auto nn = knn(partial_xyz, predicted_xyz, k);
  std::vector<char> hit(predicted_xyz.size() / 3, 0);
  for (auto i : nn.indices) hit[i] = 1;
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < hit.size(); ++i)
    if (hit[i]) out.push_back(i);
  return out;
}

PointCloud degrade(const PointCloud& predicted, const PointCloud& partial, std::size_t k) {
  return predicted.select(degrade_indices(predicted.coords(), partial.coords(), k));
}

PointCloud resample(const PointCloud& cloud, std::size_t count, std::uint64_t rng_seed) {
  if (cloud.empty()) throw InvalidArgument("resample: point cloud is empty");
  if (count == 0) throw InvalidArgument("resample: target size must be positive");
  Rng rng(rng_seed);
  const std::size_t n = cloud.size();
  std::vector<std::uint32_t> idx;
  if (n >= count) {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = i + rng.below(n - i);
      std::swap(perm[i], perm[j]);
    }
    idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(idx.begin(), idx.end());
  } else {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0u);
    while (idx.size() < count) idx.push_back(static_cast<std::uint32_t>(rng.below(n)));
  }
  return cloud.select(idx);
}

}  // namespace olat
