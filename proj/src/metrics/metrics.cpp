// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "metrics/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "common/error.hpp"

namespace olat::metrics {

namespace {

double mean_sq_nearest(const PointCloud& from, const PointCloud& to) {
  std::vector<double> d;
  nearest(from.coords(), to.coords(), &d);
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(d.size());
}

double fraction_within(const PointCloud& from, const PointCloud& to, double tau) {
  std::vector<double> d;
  nearest(from.coords(), to.coords(), &d);
  std::size_t hits = 0;
  for (double v : d)
    if (std::sqrt(v) < tau) ++hits;
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

void require_nonempty(const PointCloud& c, const char* what) {
  if (c.empty()) throw InvalidArgument(std::string(what) + ": point cloud is empty");
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, "chamfer");
  require_nonempty(b, "chamfer");
  return mean_sq_nearest(a, b) + mean_sq_nearest(b, a);
}

double ucd(const PointCloud& partial, const PointCloud& predicted) {
  require_nonempty(partial, "ucd");
  require_nonempty(predicted, "ucd");
  return mean_sq_nearest(partial, predicted);
}

double f1(const PointCloud& predicted, const PointCloud& truth, double tau) {
  require_nonempty(predicted, "f1");
  require_nonempty(truth, "f1");
  if (!(tau > 0.0)) throw InvalidArgument("f1: tau must be positive");
  const double acc = fraction_within(predicted, truth, tau);
  const double comp = fraction_within(truth, predicted, tau);
  if (acc + comp == 0.0) return 0.0;
  return 2.0 * acc * comp / (acc + comp);
}

double mmd(std::span<const PointCloud> completions, std::span<const PointCloud> references) {
  if (completions.empty() || references.empty())
    throw InvalidArgument("mmd: shape sets must be non-empty");
  double sum = 0.0;
  for (const auto& ref : references) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : completions) best = std::min(best, chamfer(c, ref));
    sum += best;
  }
  return sum / static_cast<double>(references.size());
}

void write_report_csv(const MetricReport& report, std::ostream& out) {
  auto field = [](std::optional<double> v, double scale) {
    if (!v) return std::string();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", *v * scale);
    return std::string(buf);
  };
  auto row = [&](const std::string& name, const MetricValues& m) {
    char tau[32];
    std::snprintf(tau, sizeof tau, "%g", report.tau);
    out << name << ',' << field(m.cd, 1e4) << ',' << field(m.f1, 1.0) << ','
        << field(m.ucd, 1e4) << ',' << field(m.mmd, 1e2) << ',' << tau << '\n';
  };
  out << kReportHeader << '\n';
  for (const auto& [name, m] : report.per_category) row(name, m);
  row("all", report.overall);
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream os;
  write_report_csv(report, os);
  return os.str();
}

}  // namespace olat::metrics
