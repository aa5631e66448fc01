// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "trainer/evaluate.hpp"

#include <cstring>
#include <filesystem>
#include <map>

#include "common/error.hpp"
#include "datagen/cloud_io.hpp"
#include "datagen/dataset.hpp"
#include "datagen/projection.hpp"
#include "trainer/checkpoint.hpp"
#include "trainer/trainer.hpp"

namespace olat {

namespace fs = std::filesystem;

namespace {

metrics::MetricValues score_group(const std::vector<const ScoredItem*>& group, double tau,
                                  const std::vector<PointCloud>& fallback_refs) {
  metrics::MetricValues v;
  v.count = group.size();
  bool all_truth = true;
  double cd = 0.0, f1 = 0.0, ucd = 0.0;
  std::vector<PointCloud> predicted, refs;
  for (const auto* it : group) {
    ucd += metrics::ucd(it->partial, it->predicted);
    predicted.push_back(it->predicted);
    if (it->truth) {
      cd += metrics::chamfer(it->predicted, *it->truth);
      f1 += metrics::f1(it->predicted, *it->truth, tau);
      refs.push_back(*it->truth);
    } else {
      all_truth = false;
    }
  }
  const auto n = static_cast<double>(group.size());
  v.ucd = ucd / n;
  if (all_truth) {
    v.cd = cd / n;
    v.f1 = f1 / n;
  } else {
    refs = fallback_refs;
  }
  if (!refs.empty()) v.mmd = metrics::mmd(predicted, refs);
  return v;
}

}  // namespace

metrics::MetricReport score_predictions(std::span<const ScoredItem> items, double tau,
                                        std::span<const EvalItem> extra_references) {
  if (items.empty()) throw InvalidArgument("evaluate: eval set is empty");
  if (!(tau > 0.0)) throw InvalidArgument("evaluate: tau must be positive");
  std::map<std::string, std::vector<const ScoredItem*>> groups;
  std::vector<const ScoredItem*> everything;
  for (const auto& it : items) {
    groups[it.category].push_back(&it);
    everything.push_back(&it);
  }
  std::map<std::string, std::vector<PointCloud>> refs;
  for (const auto& r : extra_references)
    refs[r.category].push_back(r.truth ? *r.truth : r.partial);

  metrics::MetricReport report;
  report.tau = tau;
  double mmd_sum = 0.0;
  std::size_t mmd_groups = 0;
  for (const auto& [name, group] : groups) {
    auto v = score_group(group, tau, refs[name]);
    if (v.mmd) {
      mmd_sum += *v.mmd;
      ++mmd_groups;
    }
    report.per_category[name] = v;
  }
  // MMD is a within-category set statistic; the overall row averages it.
  report.overall = score_group(everything, tau, {});
  report.overall.mmd.reset();
  if (mmd_groups == groups.size()) report.overall.mmd = mmd_sum / static_cast<double>(mmd_groups);
  return report;
}

metrics::MetricReport evaluate(const models::ParameterSet& partial_encoder,
                               const models::ParameterSet& complete_decoder, const TrainConfig& cfg,
                               std::span<const EvalItem> items) {
  std::vector<ScoredItem> scored;
  for (const auto& it : items)
    scored.push_back({it.category, it.partial, complete_cloud(partial_encoder, complete_decoder, cfg, it.partial),
                      it.truth});
  return score_predictions(scored, cfg.f1_tau);
}

std::vector<EvalItem> load_eval_items(const std::string& manifest_path, std::vector<EvalItem>* references) {
  const auto m = datagen::read_manifest(manifest_path);
  m.validate();
  std::vector<EvalItem> items;
  for (const auto& category : m.categories()) {
    const auto partials = m.select(datagen::EntryRole::partial, category);
    const auto truths = m.select(datagen::EntryRole::ground_truth, category);
    if (!truths.empty() && truths.size() != partials.size())
      throw InvalidArgument("eval manifest: category '" + category + "' has " + std::to_string(partials.size()) +
                            " partial but " + std::to_string(truths.size()) + " ground_truth entries");
    for (std::size_t i = 0; i < partials.size(); ++i) {
      EvalItem it{category, io::read_cloud(datagen::resolve_entry_path(manifest_path, partials[i].path)), {}};
      if (!truths.empty()) it.truth = io::read_cloud(datagen::resolve_entry_path(manifest_path, truths[i].path));
      items.push_back(std::move(it));
    }
    if (references)
      for (const auto& e : m.select(datagen::EntryRole::complete, category))
        references->push_back({category, io::read_cloud(datagen::resolve_entry_path(manifest_path, e.path)), {}});
  }
  return items;
}

metrics::MetricReport run_eval(const TrainConfig& cfg, const std::string& run_dir, const std::string& manifest_path) {
  const auto path =
      manifest_path.empty() ? (fs::path(data_dir_for(cfg, run_dir)) / "eval.manifest").string() : manifest_path;
  if (!fs::exists(path)) throw IoError("missing eval manifest " + path);
  std::vector<EvalItem> refs;
  const auto items = load_eval_items(path, &refs);
  if (items.empty()) throw InvalidArgument("eval manifest " + path + " has no partial entries");

  std::map<std::string, std::pair<models::ParameterSet, models::ParameterSet>> nets;
  std::map<std::string, TrainConfig> configs;
  std::vector<ScoredItem> scored;
  for (const auto& it : items) {
    if (!nets.count(it.category)) {
      const auto ckpt = load_checkpoint(category_checkpoint_path(run_dir, it.category));
      nets[it.category] = {parameter_set(ckpt, models::Role::partial_encoder),
                           parameter_set(ckpt, models::Role::complete_decoder)};
      configs[it.category] = ckpt.config;
    }
    const auto& [ep, dc] = nets[it.category];
    scored.push_back({it.category, it.partial, complete_cloud(ep, dc, configs[it.category], it.partial), it.truth});
  }
  const auto report = score_predictions(scored, cfg.f1_tau, refs);
  const auto csv = metrics::report_csv(report);
  write_file_atomic((fs::path(run_dir) / "report.csv").string(), std::as_bytes(std::span(csv.data(), csv.size())));
  return report;
}

namespace {

bool is_manifest(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  constexpr std::string_view tag = "#olat-manifest";
  return bytes.size() >= tag.size() && std::memcmp(bytes.data(), tag.data(), tag.size()) == 0;
}

void emit(const std::string& path, const PointCloud& completed, const PointCloud& partial, int panel) {
  std::error_code ec;
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create " + parent.string() + ": " + ec.message());
  io::write_cloud(path, completed);
  if (panel > 0)
    datagen::write_ppm(fs::path(path).replace_extension(".ppm").string(),
                       datagen::render_projection(completed, panel, &partial));
}

}  // namespace

std::vector<std::string> run_complete(const TrainConfig& cfg, const std::string& run_dir, const std::string& input,
                                      const std::string& checkpoint, const std::string& output, int projection_panel) {
  if (input.empty()) throw InvalidArgument("complete: no input given");
  if (projection_panel < 0) throw InvalidArgument("complete: projection size must be non-negative");
  struct Net {
    TrainConfig cfg;
    models::ParameterSet ep, dc;
  };
  std::map<std::string, Net> cache;
  auto net_for = [&](const std::string& category) -> const Net& {
    const auto path = checkpoint.empty() ? category_checkpoint_path(run_dir, category) : checkpoint;
    auto it = cache.find(path);
    if (it == cache.end()) {
      const auto ckpt = load_checkpoint(path);
      it = cache.emplace(path, Net{ckpt.config, parameter_set(ckpt, models::Role::partial_encoder),
                                   parameter_set(ckpt, models::Role::complete_decoder)}).first;
    }
    return it->second;
  };

  std::vector<std::string> written;
  if (is_manifest(input)) {
    const auto m = datagen::read_manifest(input);
    const fs::path root = output.empty() ? fs::path(run_dir) / "completions" : fs::path(output);
    for (const auto& e : m.select(datagen::EntryRole::partial)) {
      const auto partial = io::read_cloud(datagen::resolve_entry_path(input, e.path));
      const auto& net = net_for(e.category);
      const auto out = (root / e.category / fs::path(e.path).filename().replace_extension(".pcb")).string();
      emit(out, complete_cloud(net.ep, net.dc, net.cfg, partial), partial, projection_panel);
      written.push_back(out);
    }
  } else {
    if (checkpoint.empty() && cfg.categories.empty()) throw ConfigError("complete: no category to pick a checkpoint");
    const auto partial = io::read_cloud(input);
    const auto& net = net_for(cfg.categories.empty() ? std::string() : cfg.categories.front());
    const auto out = output.empty() ? (fs::path(run_dir) / "completed.pcb").string() : output;
    emit(out, complete_cloud(net.ep, net.dc, net.cfg, partial), partial, projection_panel);
    written.push_back(out);
  }
  return written;
}

}  // namespace olat
