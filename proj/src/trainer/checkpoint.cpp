// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "trainer/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "common/error.hpp"

namespace olat {

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::byte> take() { return std::move(out_); }

 private:
  std::vector<std::byte> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(const char* what) {
    const auto n = u32(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  void expect(std::string_view literal, const char* what) {
    need(literal.size(), what);
    if (std::memcmp(in_.data() + pos_, literal.data(), literal.size()) != 0)
      throw FormatError(std::string("bad ") + what, pos_);
    pos_ += literal.size();
  }
  void need(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) throw FormatError(std::string("truncated ") + what, in_.size());
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

}  // namespace

const Section* Checkpoint::find(std::string_view tag) const {
  for (const auto& s : sections)
    if (s.tag == tag) return &s;
  return nullptr;
}

void Checkpoint::put(Section section) {
  for (auto& s : sections) {
    if (s.tag == section.tag) {
      s = std::move(section);
      return;
    }
  }
  sections.push_back(std::move(section));
}

Section to_section(const models::ParameterSet& set) {
  return {std::string(models::to_string(set.role())), set.arrays()};
}

models::ParameterSet to_parameter_set(const Section& section) {
  const auto role = models::role_from_string(section.tag);
  if (!role) throw FormatError("section '" + section.tag + "' is not a parameter set", 0);
  models::ParameterSet set(*role);
  for (const auto& a : section.arrays) set.add(a.name, a.shape, a.data);
  return set;
}

models::ParameterSet parameter_set(const Checkpoint& ckpt, models::Role role) {
  const auto* s = ckpt.find(models::to_string(role));
  if (!s) throw FormatError("checkpoint has no " + std::string(models::to_string(role)) + " section", 0);
  return to_parameter_set(*s);
}

Section adam_section(std::string tag, const models::ParameterSet& params, const Adam& adam) {
  Section s{std::move(tag), {}};
  const auto t = adam.steps();
  // Step count as two 24-bit halves, each exact in a float.
  s.arrays.push_back({"t", {2}, {static_cast<float>(t & 0xffffff), static_cast<float>(t >> 24)}});
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.arrays.push_back({"m." + params[i].name, params[i].shape, adam.first_moments()[i]});
    s.arrays.push_back({"v." + params[i].name, params[i].shape, adam.second_moments()[i]});
  }
  return s;
}

Adam restore_adam(const Section& section, const models::ParameterSet& params) {
  if (section.arrays.size() != 1 + 2 * params.size() || section.arrays[0].name != "t" ||
      section.arrays[0].data.size() != 2)
    throw FormatError("optimizer section '" + section.tag + "' does not match its parameters", 0);
  const auto lo = static_cast<std::uint64_t>(section.arrays[0].data[0]);
  const auto hi = static_cast<std::uint64_t>(section.arrays[0].data[1]);
  std::vector<std::vector<float>> m, v;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m.push_back(section.arrays[1 + 2 * i].data);
    v.push_back(section.arrays[2 + 2 * i].data);
  }
  Adam adam(params);
  adam.restore(lo | (hi << 24), std::move(m), std::move(v));
  return adam;
}

std::vector<std::byte> serialize(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kCheckpointMagic, 5);
  w.str(config_echo(ckpt.config));
  w.u32(static_cast<std::uint32_t>(ckpt.sections.size()));
  for (const auto& s : ckpt.sections) {
    w.str(s.tag);
    w.u32(static_cast<std::uint32_t>(s.arrays.size()));
    for (const auto& a : s.arrays) {
      w.str(a.name);
      w.u32(static_cast<std::uint32_t>(a.shape.size()));
      for (auto d : a.shape) w.u32(d);
      for (float f : a.data) w.f32(f);
    }
  }
  return w.take();
}

Checkpoint deserialize(std::span<const std::byte> bytes) {
  Reader r(bytes);
  r.expect(std::string_view(kCheckpointMagic, 5), "checkpoint magic");
  Checkpoint ckpt;
  const auto config_at = r.pos();
  const auto config_text = r.str("config text");
  try {
    apply_config_text(ckpt.config, config_text);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid embedded config: ") + e.what(), config_at);
  }
  const auto sections = r.u32("section count");
  for (std::uint32_t si = 0; si < sections; ++si) {
    Section s;
    s.tag = r.str("section tag");
    const auto arrays = r.u32("array count");
    for (std::uint32_t ai = 0; ai < arrays; ++ai) {
      models::ParameterArray a;
      a.name = r.str("array name");
      const auto dims_at = r.pos();
      const auto ndim = r.u32("array rank");
      if (ndim == 0 || ndim > 2) throw FormatError("array rank must be 1 or 2", dims_at);
      std::uint64_t count = 1;
      for (std::uint32_t k = 0; k < ndim; ++k) {
        a.shape.push_back(r.u32("array dims"));
        count *= a.shape.back();
      }
      r.need(count * 4, "array data");
      a.data.resize(count);
      for (auto& f : a.data) f = r.f32("array data");
      s.arrays.push_back(std::move(a));
    }
    ckpt.sections.push_back(std::move(s));
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint", r.pos());
  return ckpt;
}

std::vector<std::byte> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  if (size && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
    throw IoError("cannot read " + path);
  return bytes;
}

void write_file_atomic(const std::string& path, std::span<const std::byte> bytes) {
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file_atomic(path, serialize(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return deserialize(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw e.in_file(path);
  }
}

}  // namespace olat
