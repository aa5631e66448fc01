// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "datagen/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "common/error.hpp"
#include "trainer/checkpoint.hpp"

namespace olat::datagen {

namespace {

constexpr int kGap = 4;
constexpr int kAxes[3][2] = {{0, 1}, {0, 2}, {2, 1}};

void plot(Image& img, int panel, int size, const PointCloud& cloud, const std::uint8_t colour[3]) {
  const int x0 = panel * (size + kGap);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud[i];
    const double u = p[kAxes[panel][0]], v = p[kAxes[panel][1]];
    const int px = static_cast<int>(std::lround((u + 1.0) * 0.5 * (size - 1)));
    const int py = static_cast<int>(std::lround((1.0 - (v + 1.0) * 0.5) * (size - 1)));
    if (px < 0 || px >= size || py < 0 || py >= size) continue;
    auto* dst = &img.rgb[3 * (static_cast<std::size_t>(py) * img.width + x0 + px)];
    std::copy(colour, colour + 3, dst);
  }
}

}  // namespace

Image render_projection(const PointCloud& cloud, int panel_size, const PointCloud* overlay) {
  if (panel_size < 8) throw InvalidArgument("render_projection: panel size must be at least 8");
  Image img;
  img.width = 3 * panel_size + 2 * kGap;
  img.height = panel_size;
  img.rgb.assign(static_cast<std::size_t>(img.width) * img.height * 3, 255);
  for (int y = 0; y < img.height; ++y)
    for (int g = 1; g <= 2; ++g)
      for (int x = g * panel_size + (g - 1) * kGap; x < g * (panel_size + kGap); ++x)
        std::fill_n(&img.rgb[3 * (static_cast<std::size_t>(y) * img.width + x)], 3, 160);
  const std::uint8_t base[3] = {30, 60, 160};
  const std::uint8_t over[3] = {220, 40, 30};
  for (int panel = 0; panel < 3; ++panel) {
    plot(img, panel, panel_size, cloud, base);
    if (overlay) plot(img, panel, panel_size, *overlay, over);
  }
  return img;
}

void write_ppm(const std::string& path, const Image& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::byte> bytes(header.size() + image.rgb.size());
  std::memcpy(bytes.data(), header.data(), header.size());
  std::memcpy(bytes.data() + header.size(), image.rgb.data(), image.rgb.size());
  write_file_atomic(path, bytes);
}

}  // namespace olat::datagen
