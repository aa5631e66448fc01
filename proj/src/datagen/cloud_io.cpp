// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "datagen/cloud_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "common/error.hpp"
#include "trainer/checkpoint.hpp"

namespace olat::io {

namespace {

std::uint32_t get_u32(std::span<const std::byte> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

PointCloud decode_binary(std::span<const std::byte> in) {
  if (in.size() < 8) throw FormatError("truncated cloud header", in.size());
  const std::uint64_t count = get_u32(in, 4);
  const std::uint64_t expected = 8 + 12 * count;
  if (in.size() < expected) throw FormatError("truncated cloud data", in.size());
  if (in.size() > expected) throw FormatError("trailing bytes after cloud data", expected);
  std::vector<double> xyz(3 * count);
  for (std::uint64_t i = 0; i < 3 * count; ++i) {
    const float f = std::bit_cast<float>(get_u32(in, 8 + 4 * i));
    if (!std::isfinite(f)) throw FormatError("non-finite coordinate", 8 + 4 * i);
    xyz[i] = f;
  }
  return PointCloud(std::move(xyz));
}

PointCloud decode_ascii(std::span<const std::byte> in) {
  std::string text(reinterpret_cast<const char*>(in.data()), in.size());
  std::vector<double> xyz;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    const char* p = line.c_str();
    int values = 0;
    while (true) {
      while (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',') ++p;
      if (*p == '\0') break;
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p || !std::isfinite(v))
        throw FormatError("malformed coordinate", pos + static_cast<std::size_t>(p - line.c_str()));
      xyz.push_back(v);
      ++values;
      p = end;
    }
    if (values != 0 && values != 3) throw FormatError("expected 3 coordinates per line", pos);
    pos = nl + 1;
  }
  if (xyz.empty()) throw FormatError("no points in text cloud", 0);
  return PointCloud(std::move(xyz));
}

}  // namespace

std::vector<std::byte> encode_cloud_binary(const PointCloud& cloud) {
  std::vector<std::byte> out(8 + 12 * cloud.size());
  std::memcpy(out.data(), kCloudMagic, 4);
  auto store = [&](std::size_t at, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out[at + b] = static_cast<std::byte>((v >> (8 * b)) & 0xff);
  };
  store(4, static_cast<std::uint32_t>(cloud.size()));
  std::size_t at = 8;
  for (double v : cloud.xyz()) {
    store(at, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    at += 4;
  }
  return out;
}

std::string encode_cloud_ascii(const PointCloud& cloud) {
  std::string out;
  char buf[96];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud[i];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
    out += buf;
  }
  return out;
}

PointCloud decode_cloud(std::span<const std::byte> bytes) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kCloudMagic, 4) == 0) return decode_binary(bytes);
  return decode_ascii(bytes);
}

CloudFormat format_for_path(const std::string& path) {
  auto ends_with = [&](const char* ext) {
    const auto n = std::strlen(ext);
    return path.size() >= n && path.compare(path.size() - n, n, ext) == 0;
  };
  return ends_with(".xyz") || ends_with(".txt") ? CloudFormat::ascii : CloudFormat::binary;
}

void write_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format) {
  if (format == CloudFormat::binary) {
    write_file_atomic(path, encode_cloud_binary(cloud));
  } else {
    const auto text = encode_cloud_ascii(cloud);
    write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
  }
}

void write_cloud(const std::string& path, const PointCloud& cloud) {
  write_cloud(path, cloud, format_for_path(path));
}

PointCloud read_cloud(const std::string& path) {
  try {
    return decode_cloud(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw e.in_file(path);
  }
}

}  // namespace olat::io
