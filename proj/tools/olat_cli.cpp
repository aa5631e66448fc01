// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end over the C API.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "olat/olat.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitConfig = 3;

int exit_code(olat_status st) {
  switch (st) {
    case OLAT_OK: return kExitOk;
    case OLAT_DIVERGED: return kExitDiverged;
    case OLAT_CONFIG: return kExitConfig;
    default: return kExitRuntime;
  }
}

int report(olat_status st, const char* what) {
  if (st != OLAT_OK)
    std::fprintf(stderr, "olat %s: %s: %s\n", what, olat_status_string(st), olat_last_error());
  return exit_code(st);
}

struct ConfigHandle {
  olat_config* cfg = nullptr;
  ~ConfigHandle() { olat_config_destroy(cfg); }
};

// File first, then key=value overrides in argument order.
olat_status build_config(ConfigHandle& h, const std::string& file, const std::vector<std::string>& overrides) {
  if (auto st = olat_config_create(&h.cfg); st != OLAT_OK) return st;
  if (!file.empty())
    if (auto st = olat_config_load_file(h.cfg, file.c_str()); st != OLAT_OK) return st;
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "olat: override '%s' is not of the form key=value\n", kv.c_str());
      return OLAT_CONFIG;
    }
    const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (auto st = olat_config_set(h.cfg, key.c_str(), value.c_str()); st != OLAT_OK)
      return st == OLAT_INVALID_ARGUMENT ? OLAT_CONFIG : st;
  }
  return OLAT_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"olat: unpaired point cloud completion with a structured latent space"};
  app.require_subcommand(1);

  std::string config_file, run_dir;
  std::vector<std::string> overrides;
  std::string input, checkpoint, output, eval_manifest, resume;
  bool projection = false;
  int panel_size = 256;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "config file of key = value lines")->check(CLI::ExistingFile);
    sub->add_option("--run-dir", run_dir, "run directory (default: $OLAT_RUN_DIR, else ./olat_run)");
    sub->add_option("overrides", overrides, "key=value config overrides");
  };
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic train/eval dataset");
  auto* pre = app.add_subcommand("pretrain-ae", "pretrain the complete-shape auto-encoder per category");
  auto* train = app.add_subcommand("train", "train one completion model per category");
  auto* complete = app.add_subcommand("complete", "complete a cloud file or every partial of a manifest");
  auto* eval = app.add_subcommand("eval", "evaluate trained models and write report.csv");
  for (auto* sub : {gen, pre, train, complete, eval}) add_common(sub);
  train->add_option("--resume", resume, "checkpoint to continue from (single category)")->check(CLI::ExistingFile);
  complete->add_option("--input", input, "cloud file or manifest")->required()->check(CLI::ExistingFile);
  complete->add_option("--checkpoint", checkpoint, "model checkpoint (default: ckpt_<category>.olat)");
  complete->add_option("--output", output, "output cloud (single input) or directory (manifest)");
  complete->add_flag("--projection", projection, "also write a 3-panel orthographic .ppm");
  complete->add_option("--panel-size", panel_size, "projection panel size in pixels")->check(CLI::Range(8, 4096));
  eval->add_option("--manifest", eval_manifest, "eval manifest (default: <data_dir>/eval.manifest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (run_dir.empty()) {
    const char* env = std::getenv("OLAT_RUN_DIR");
    run_dir = env && *env ? env : "olat_run";
  }

  ConfigHandle h;
  if (auto st = build_config(h, config_file, overrides); st != OLAT_OK) return report(st, "config");

  if (gen->parsed()) return report(olat_gen_data(h.cfg, run_dir.c_str()), "gen-data");
  if (pre->parsed()) return report(olat_pretrain_ae(h.cfg, run_dir.c_str()), "pretrain-ae");
  if (train->parsed())
    return report(olat_train(h.cfg, run_dir.c_str(), resume.empty() ? nullptr : resume.c_str()), "train");
  if (eval->parsed()) {
    const auto st = olat_eval(h.cfg, run_dir.c_str(), eval_manifest.empty() ? nullptr : eval_manifest.c_str());
    if (st == OLAT_OK) std::printf("wrote %s/report.csv\n", run_dir.c_str());
    return report(st, "eval");
  }
  size_t written = 0;
  const auto st = olat_complete(h.cfg, run_dir.c_str(), input.c_str(), checkpoint.empty() ? nullptr : checkpoint.c_str(),
                                output.empty() ? nullptr : output.c_str(), projection ? panel_size : 0, &written);
  if (st == OLAT_OK) std::printf("completed %zu cloud(s)\n", written);
  return report(st, "complete");
}
