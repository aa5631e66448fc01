// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "datagen/shapes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "common/error.hpp"

namespace olat::datagen {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Box {
  Point3 centre;
  Point3 half;
};

struct Cylinder {  // vertical axis
  Point3 centre;
  double radius;
  double half_height;
  bool caps;
};

struct Sphere {
  Point3 centre;
  double radius;
};

struct Part {
  enum Kind { kBox, kCylinder, kSphere } kind;
  Box box{};
  Cylinder cyl{};
  Sphere sph{};

  double area() const {
    switch (kind) {
      case kBox: {
        const auto& h = box.half;
        return 8.0 * (h[0] * h[1] + h[1] * h[2] + h[0] * h[2]);
      }
      case kCylinder:
        return 4.0 * kPi * cyl.radius * cyl.half_height + (cyl.caps ? 2.0 * kPi * cyl.radius * cyl.radius : 0.0);
      case kSphere:
        return 4.0 * kPi * sph.radius * sph.radius;
    }
    return 0.0;
  }

  // Axis-aligned bounding box corners (min, max).
  std::pair<Point3, Point3> bounds() const {
    Point3 c{}, h{};
    switch (kind) {
      case kBox: c = box.centre; h = box.half; break;
      case kCylinder: c = cyl.centre; h = {cyl.radius, cyl.half_height, cyl.radius}; break;
      case kSphere: c = sph.centre; h = {sph.radius, sph.radius, sph.radius}; break;
    }
    return {{c[0] - h[0], c[1] - h[1], c[2] - h[2]}, {c[0] + h[0], c[1] + h[1], c[2] + h[2]}};
  }

  // Farthest distance of the part's surface from `o` (exact for spheres, a
  // bounding-box corner bound otherwise).
  double reach(const Point3& o) const {
    if (kind == kSphere) {
      const double dx = sph.centre[0] - o[0], dy = sph.centre[1] - o[1], dz = sph.centre[2] - o[2];
      return std::sqrt(dx * dx + dy * dy + dz * dz) + sph.radius;
    }
    if (kind == kBox) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double e = std::abs(box.centre[a] - o[a]) + box.half[a];
        s += e * e;
      }
      return std::sqrt(s);
    }
    // Cylinder: farthest point lies on a rim circle.
    const double dx = cyl.centre[0] - o[0], dz = cyl.centre[2] - o[2];
    const double radial = std::sqrt(dx * dx + dz * dz) + cyl.radius;
    const double vertical = std::abs(cyl.centre[1] - o[1]) + cyl.half_height;
    return std::sqrt(radial * radial + vertical * vertical);
  }

  Point3 sample(Rng& rng) const {
    switch (kind) {
      case kBox: {
        const auto& h = box.half;
        const double areas[3] = {h[1] * h[2], h[0] * h[2], h[0] * h[1]};  // faces normal to x, y, z
        double u = rng.uniform() * (areas[0] + areas[1] + areas[2]);
        int axis = 0;
        while (axis < 2 && u >= areas[axis]) u -= areas[axis++];
        Point3 p;
        for (int a = 0; a < 3; ++a) p[a] = rng.uniform(-h[a], h[a]);
        p[axis] = rng.uniform() < 0.5 ? -h[axis] : h[axis];
        return {p[0] + box.centre[0], p[1] + box.centre[1], p[2] + box.centre[2]};
      }
      case kCylinder: {
        const double side = 4.0 * kPi * cyl.radius * cyl.half_height;
        const double cap = cyl.caps ? kPi * cyl.radius * cyl.radius : 0.0;
        const double u = rng.uniform() * (side + 2.0 * cap);
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        Point3 p;
        if (u < side) {
          p = {cyl.radius * std::cos(theta), rng.uniform(-cyl.half_height, cyl.half_height),
               cyl.radius * std::sin(theta)};
        } else {
          const double r = cyl.radius * std::sqrt(rng.uniform());
          const double y = u < side + cap ? -cyl.half_height : cyl.half_height;
          p = {r * std::cos(theta), y, r * std::sin(theta)};
        }
        return {p[0] + cyl.centre[0], p[1] + cyl.centre[1], p[2] + cyl.centre[2]};
      }
      case kSphere: {
        double x, y, z, n;
        do {
          x = rng.normal();
          y = rng.normal();
          z = rng.normal();
          n = std::sqrt(x * x + y * y + z * z);
        } while (n < 1e-12);
        return {sph.centre[0] + sph.radius * x / n, sph.centre[1] + sph.radius * y / n,
                sph.centre[2] + sph.radius * z / n};
      }
    }
    return {};
  }
};

Part box_part(Point3 c, Point3 h) { return {Part::kBox, {c, h}, {}, {}}; }
Part cyl_part(Point3 c, double r, double hh, bool caps) { return {Part::kCylinder, {}, {c, r, hh, caps}, {}}; }

std::size_t expected_params(Category c) {
  switch (c) {
    case Category::box: return 3;
    case Category::cylinder: return 2;
    case Category::sphere: return 1;
    case Category::lamp_like: return 6;
    case Category::chair_like: return 6;
  }
  return 0;
}

std::vector<Part> build_parts(const ShapeSpec& spec) {
  if (spec.params.size() != expected_params(spec.category))
    throw InvalidArgument("ShapeSpec: wrong parameter count for " + std::string(to_string(spec.category)));
  for (double p : spec.params)
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("ShapeSpec: parameters must be positive");
  if (spec.sample_count == 0) throw InvalidArgument("ShapeSpec: sample_count must be positive");
  if (!std::isfinite(spec.yaw)) throw InvalidArgument("ShapeSpec: yaw must be finite");
  const auto& p = spec.params;
  switch (spec.category) {
    case Category::box:
      return {box_part({0, 0, 0}, {p[0], p[1], p[2]})};
    case Category::cylinder:
      return {cyl_part({0, 0, 0}, p[0], p[1], true)};
    case Category::sphere:
      return {Part{Part::kSphere, {}, {}, {{0, 0, 0}, p[0]}}};
    case Category::lamp_like: {
      const double base_r = p[0], base_h = p[1], pole_r = p[2], pole_len = p[3], shade_r = p[4], shade_h = p[5];
      if (pole_r >= base_r) throw InvalidArgument("lamp_like: pole radius must be below base radius");
      return {cyl_part({0, base_h, 0}, base_r, base_h, true),
              cyl_part({0, 2 * base_h + pole_len / 2, 0}, pole_r, pole_len / 2, false),
              cyl_part({0, 2 * base_h + pole_len + shade_h * 0.5, 0}, shade_r, shade_h, false)};
    }
    case Category::chair_like: {
      const double sw = p[0], st = p[1], sd = p[2], seat_y = p[3], back_h = p[4], leg = p[5];
      if (leg >= sw || leg >= sd) throw InvalidArgument("chair_like: legs must be thinner than the seat");
      std::vector<Part> parts{box_part({0, seat_y, 0}, {sw, st, sd}),
                              box_part({0, seat_y + st + back_h / 2, -sd + st}, {sw, back_h / 2, st})};
      const double leg_half = (seat_y - st) / 2;
      for (double sx : {-1.0, 1.0})
        for (double sz : {-1.0, 1.0})
          parts.push_back(box_part({sx * (sw - leg), leg_half, sz * (sd - leg)}, {leg, leg_half, leg}));
      return parts;
    }
  }
  throw InvalidArgument("ShapeSpec: unknown category");
}

ShapeFrame frame_of(const std::vector<Part>& parts) {
  Point3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& part : parts) {
    const auto [a, b] = part.bounds();
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], a[k]);
      hi[k] = std::max(hi[k], b[k]);
    }
  }
  ShapeFrame f;
  for (int k = 0; k < 3; ++k) f.centre[k] = 0.5 * (lo[k] + hi[k]);
  f.radius = 0.0;
  for (const auto& part : parts) f.radius = std::max(f.radius, part.reach(f.centre));
  return f;
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::box: return "box";
    case Category::cylinder: return "cylinder";
    case Category::sphere: return "sphere";
    case Category::lamp_like: return "lamp_like";
    case Category::chair_like: return "chair_like";
  }
  return "unknown";
}

std::optional<Category> category_from_string(std::string_view name) {
  for (auto c : {Category::box, Category::cylinder, Category::sphere, Category::lamp_like, Category::chair_like})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

ShapeSpec random_shape_spec(Category category, std::size_t sample_count, Rng& rng) {
  ShapeSpec s;
  s.category = category;
  s.sample_count = sample_count;
  switch (category) {
    case Category::box:
      s.params = {rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)};
      break;
    case Category::cylinder:
      s.params = {rng.uniform(0.2, 0.8), rng.uniform(0.3, 1.0)};
      break;
    case Category::sphere:
      s.params = {rng.uniform(0.5, 1.0)};
      break;
    case Category::lamp_like:
      s.params = {rng.uniform(0.3, 0.6), rng.uniform(0.03, 0.08), rng.uniform(0.02, 0.05),
                  rng.uniform(0.6, 1.2), rng.uniform(0.25, 0.5), rng.uniform(0.1, 0.25)};
      break;
    case Category::chair_like:
      s.params = {rng.uniform(0.35, 0.6), rng.uniform(0.03, 0.06), rng.uniform(0.35, 0.6),
                  rng.uniform(0.4, 0.7), rng.uniform(0.4, 0.8), rng.uniform(0.02, 0.05)};
      break;
  }
  s.yaw = rng.uniform(0.0, 2.0 * kPi);
  return s;
}

ShapeFrame shape_frame(const ShapeSpec& spec) { return frame_of(build_parts(spec)); }

PointCloud sample_shape(const ShapeSpec& spec, std::uint64_t seed) {
  const auto parts = build_parts(spec);
  const auto frame = frame_of(parts);
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& part : parts) cumulative.push_back(total += part.area());

  Rng rng(seed);
  const double c = std::cos(spec.yaw), s = std::sin(spec.yaw);
  std::vector<double> xyz;
  xyz.reserve(3 * spec.sample_count);
  for (std::size_t i = 0; i < spec.sample_count; ++i) {
    const double u = rng.uniform() * total;
    const auto k = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const auto p = parts[std::min(k, parts.size() - 1)].sample(rng);
    const double x = (p[0] - frame.centre[0]) / frame.radius;
    const double y = (p[1] - frame.centre[1]) / frame.radius;
    const double z = (p[2] - frame.centre[2]) / frame.radius;
    xyz.insert(xyz.end(), {c * x + s * z, y, -s * x + c * z});
  }
  return PointCloud(std::move(xyz));
}

PointCloud make_partial(const PointCloud& complete, PartialMode mode, double severity,
                        std::uint64_t seed) {
  if (complete.empty()) throw InvalidArgument("make_partial: point cloud is empty");
  if (!(severity > 0.0 && severity <= 0.9))
    throw InvalidArgument("make_partial: severity must lie in (0, 0.9]");
  Rng rng(seed);
  Point3 dir;
  double norm;
  do {
    dir = {rng.normal(), rng.normal(), rng.normal()};
    norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
  } while (norm < 1e-12);
  for (auto& v : dir) v /= norm;

  const std::size_t n = complete.size();
  Point3 centre{0, 0, 0};
  if (mode == PartialMode::viewpoint) {
    for (std::size_t i = 0; i < n; ++i)
      for (int a = 0; a < 3; ++a) centre[a] += complete[i][a];
    for (auto& v : centre) v /= static_cast<double>(n);
  }

  // Removal score: larger means dropped first.
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = complete[i];
    if (mode == PartialMode::halfspace) {
      score[i] = p[0] * dir[0] + p[1] * dir[1] + p[2] * dir[2];
    } else {
      const Point3 q{p[0] - centre[0], p[1] - centre[1], p[2] - centre[2]};
      const double len = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
      const double cosine = len > 0.0 ? (q[0] * dir[0] + q[1] * dir[1] + q[2] * dir[2]) / len : 0.0;
      score[i] = -cosine;  // facing away from the viewer
    }
  }
  const auto drop = static_cast<std::size_t>(std::llround(severity * static_cast<double>(n)));
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return score[a] > score[b]; });
  std::vector<char> removed(n, 0);
  for (std::size_t i = 0; i < drop; ++i) removed[order[i]] = 1;
  std::vector<std::uint32_t> keep;
  for (std::uint32_t i = 0; i < n; ++i)
    if (!removed[i]) keep.push_back(i);
  if (keep.empty()) throw InvalidArgument("make_partial: nothing left after removal");
  return complete.select(keep);
}

}  // namespace olat::datagen
