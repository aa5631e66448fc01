// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "geometry/point_cloud.hpp"

namespace olat::metrics {

/// Symmetric Chamfer distance: mean squared nearest-neighbour distance from a
/// to b plus the same from b to a.
double chamfer(const PointCloud& a, const PointCloud& b);

/// One-directional Chamfer term from the partial input to the prediction.
double ucd(const PointCloud& partial, const PointCloud& predicted);

/// Harmonic mean of accuracy (predicted points within tau of truth) and
/// completeness (truth points within tau of the prediction). Distances are
/// unsquared; 0 when both fractions are 0.
double f1(const PointCloud& predicted, const PointCloud& truth, double tau);

/// Mean over references of the minimum Chamfer distance to any completion.
double mmd(std::span<const PointCloud> completions, std::span<const PointCloud> references);

inline constexpr double kDefaultF1Tau = 0.01;

/// Aggregated metrics for one category (or the overall set). Absent values
/// are left empty: cd/f1 need ground truth, mmd needs a reference set.
struct MetricValues {
  std::optional<double> cd;
  std::optional<double> f1;
  double ucd = 0.0;
  std::optional<double> mmd;
  std::size_t count = 0;
};

struct MetricReport {
  double tau = kDefaultF1Tau;
  MetricValues overall;
  std::map<std::string, MetricValues> per_category;
};

/// CSV with header `category,cd_x1e4,f1,ucd_x1e4,mmd_x1e2,tau`; CD/UCD scaled by
/// 1e4 and MMD by 1e2. The overall row is labelled `all`.
void write_report_csv(const MetricReport& report, std::ostream& out);
std::string report_csv(const MetricReport& report);

inline constexpr const char* kReportHeader = "category,cd_x1e4,f1,ucd_x1e4,mmd_x1e2,tau";

}  // namespace olat::metrics
