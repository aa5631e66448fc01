// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "datagen/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "datagen/cloud_io.hpp"
#include "datagen/shapes.hpp"
#include "trainer/checkpoint.hpp"

namespace olat::datagen {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kHeaderTag = "#olat-manifest";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

template <class T>
bool parse_int(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string_view to_string(EntryRole r) {
  switch (r) {
    case EntryRole::partial: return "partial";
    case EntryRole::complete: return "complete";
    case EntryRole::ground_truth: return "ground_truth";
  }
  return "unknown";
}

std::optional<EntryRole> entry_role_from_string(std::string_view name) {
  for (auto r : {EntryRole::partial, EntryRole::complete, EntryRole::ground_truth})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

std::vector<ManifestEntry> DatasetManifest::select(EntryRole role, std::string_view category) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.role == role && (category.empty() || e.category == category)) out.push_back(e);
  return out;
}

std::vector<std::string> DatasetManifest::categories() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (std::find(out.begin(), out.end(), e.category) == out.end()) out.push_back(e.category);
  return out;
}

std::optional<std::uint64_t> instance_id(const ManifestEntry& e) {
  const std::string stem = fs::path(e.path).stem().string();
  const auto us = stem.rfind('_');
  if (us == std::string::npos) return std::nullopt;
  std::uint64_t id = 0;
  if (!parse_int(std::string_view(stem).substr(us + 1), id)) return std::nullopt;
  return id;
}

void DatasetManifest::validate() const {
  std::map<std::string, std::set<std::uint64_t>> partial_ids;
  for (const auto& e : entries) {
    if (e.role == EntryRole::ground_truth && split == "train")
      throw InvalidArgument("manifest: ground_truth entries are not allowed in a train split");
    if (e.role == EntryRole::partial)
      if (auto id = instance_id(e)) partial_ids[e.category].insert(*id);
  }
  for (const auto& e : entries) {
    if (e.role != EntryRole::complete) continue;
    const auto id = instance_id(e);
    if (id && partial_ids[e.category].count(*id))
      throw InvalidArgument("manifest: complete entry " + e.path +
                            " shares an instance with a partial entry");
  }
}

std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream os;
  os << kHeaderTag << "\tversion=" << m.version << "\tsplit=" << m.split << "\tseed=" << m.seed
     << '\n';
  for (const auto& e : m.entries) os << to_string(e.role) << '\t' << e.category << '\t' << e.path << '\n';
  return os.str();
}

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest m;
  bool header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::size_t line_start = pos;
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    const std::string where = "manifest line " + std::to_string(line_no);
    if (!header) {
      if (fields[0] != kHeaderTag) throw FormatError(where + ": missing '#olat-manifest' header", line_start);
      bool have_version = false, have_seed = false;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string_view::npos) throw FormatError(where + ": malformed header field", line_start);
        const auto key = fields[i].substr(0, eq), value = fields[i].substr(eq + 1);
        if (key == "version") {
          have_version = parse_int(value, m.version);
        } else if (key == "seed") {
          have_seed = parse_int(value, m.seed);
        } else if (key == "split") {
          m.split = std::string(value);
        }
      }
      if (!have_version || !have_seed) throw FormatError(where + ": header needs version and seed", line_start);
      if (m.version != kManifestVersion)
        throw FormatError(where + ": unsupported manifest version " + std::to_string(m.version), line_start);
      header = true;
      continue;
    }
    if (line.front() == '#') continue;
    if (fields.size() != 3) throw FormatError(where + ": expected role<TAB>category<TAB>path", line_start);
    const auto role = entry_role_from_string(fields[0]);
    if (!role) throw FormatError(where + ": unknown role '" + std::string(fields[0]) + "'", line_start);
    if (fields[1].empty() || fields[2].empty()) throw FormatError(where + ": empty field", line_start);
    m.entries.push_back({*role, std::string(fields[1]), std::string(fields[2])});
  }
  if (!header) throw FormatError("manifest: empty file", 0);
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  const auto text = format_manifest(m);
  write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

DatasetManifest read_manifest(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const FormatError& e) {
    throw e.in_file(path);
  }
}

std::string resolve_entry_path(const std::string& manifest_path, const std::string& entry_path) {
  const fs::path p(entry_path);
  if (p.is_absolute()) return entry_path;
  return (fs::path(manifest_path).parent_path() / p).string();
}

BuiltDataset build_dataset(const TrainConfig& cfg, const std::string& dir) {
  cfg.validate();
  const auto n_points = static_cast<std::size_t>(cfg.cloud_points);
  const auto n_partial = static_cast<std::uint64_t>(cfg.partial_per_category);
  const auto n_complete = static_cast<std::uint64_t>(cfg.complete_per_category);
  const auto n_eval = static_cast<std::uint64_t>(cfg.eval_per_category);

  DatasetManifest train{"train", cfg.data_seed, kManifestVersion, {}};
  DatasetManifest eval{"eval", cfg.data_seed, kManifestVersion, {}};

  std::error_code ec;
  for (std::size_t ci = 0; ci < cfg.categories.size(); ++ci) {
    const auto& name = cfg.categories[ci];
    const auto category = category_from_string(name);
    if (!category) throw ConfigError("unknown category '" + name + "'");
    for (const char* split : {"train", "eval"}) {
      fs::create_directories(fs::path(dir) / split / name, ec);
      if (ec) throw IoError("cannot create " + (fs::path(dir) / split / name).string() + ": " + ec.message());
    }

    // One generated instance: a random spec, its complete cloud and an occluded view.
    auto instance = [&](std::uint64_t id, bool need_partial) {
      const auto s = derive_seed({cfg.data_seed, 0x5e11ULL, ci, id});
      Rng rng(s);
      const auto spec = random_shape_spec(*category, n_points, rng);
      PointCloud complete = sample_shape(spec, derive_seed({s, 1}));
      PointCloud partial;
      if (need_partial) {
        const double severity = rng.uniform(cfg.severity_min, cfg.severity_max);
        partial = make_partial(complete, cfg.partial_mode, severity, derive_seed({s, 2}));
      }
      return std::pair{std::move(complete), std::move(partial)};
    };
    auto rel = [&](const char* split, const char* role, std::uint64_t id) {
      return (fs::path(split) / name / (std::string(role) + "_" + std::to_string(id) + ".pcb")).generic_string();
    };
    auto put = [&](const std::string& relpath, const PointCloud& c) {
      io::write_cloud((fs::path(dir) / relpath).string(), c, io::CloudFormat::binary);
    };

    for (std::uint64_t i = 0; i < n_partial; ++i) {
      const auto id = i;
      const auto [complete, partial] = instance(id, true);
      const auto path = rel("train", "partial", id);
      put(path, partial);
      train.entries.push_back({EntryRole::partial, name, path});
    }
    for (std::uint64_t i = 0; i < n_complete; ++i) {
      const auto id = n_partial + i;
      const auto [complete, partial] = instance(id, false);
      const auto path = rel("train", "complete", id);
      put(path, complete);
      train.entries.push_back({EntryRole::complete, name, path});
    }
    for (std::uint64_t i = 0; i < n_eval; ++i) {
      const auto id = n_partial + n_complete + i;
      const auto [complete, partial] = instance(id, true);
      const auto ppath = rel("eval", "partial", id);
      const auto gpath = rel("eval", "gt", id);
      put(ppath, partial);
      put(gpath, complete);
      eval.entries.push_back({EntryRole::partial, name, ppath});
      eval.entries.push_back({EntryRole::ground_truth, name, gpath});
    }
  }
  train.validate();
  eval.validate();
  BuiltDataset out{(fs::path(dir) / "train.manifest").string(), (fs::path(dir) / "eval.manifest").string()};
  write_manifest(out.train_manifest, train);
  write_manifest(out.eval_manifest, eval);
  return out;
}

std::vector<PointCloud> load_clouds(const std::string& manifest_path, const DatasetManifest& m,
                                    EntryRole role, std::string_view category) {
  std::vector<PointCloud> out;
  for (const auto& e : m.select(role, category))
    out.push_back(io::read_cloud(resolve_entry_path(manifest_path, e.path)));
  return out;
}

}  // namespace olat::datagen
