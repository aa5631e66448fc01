// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "olat/olat.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "datagen/cloud_io.hpp"
#include "datagen/dataset.hpp"
#include "datagen/projection.hpp"
#include "metrics/metrics.hpp"
#include "trainer/checkpoint.hpp"
#include "trainer/config.hpp"
#include "trainer/evaluate.hpp"
#include "trainer/trainer.hpp"

struct olat_cloud {
  olat::PointCloud cloud;
};

struct olat_config {
  olat::TrainConfig cfg;
};

struct olat_model {
  olat::TrainConfig cfg;
  olat::models::ParameterSet encoder;
  olat::models::ParameterSet decoder;
};

namespace {

thread_local std::string g_last_error;

olat_status fail(olat_status status, const char* message) {
  g_last_error = message;
  return status;
}

// Maps the exception in flight to a status code.
olat_status translate() {
  try {
    throw;
  } catch (const olat::DivergenceError& e) {
    return fail(OLAT_DIVERGED, e.what());
  } catch (const olat::NumericError& e) {
    return fail(OLAT_NUMERIC, e.what());
  } catch (const olat::InvalidArgument& e) {
    return fail(OLAT_INVALID_ARGUMENT, e.what());
  } catch (const olat::DegenerateInput& e) {
    return fail(OLAT_DEGENERATE, e.what());
  } catch (const olat::FormatError& e) {
    return fail(OLAT_FORMAT, e.what());
  } catch (const olat::IoError& e) {
    return fail(OLAT_IO, e.what());
  } catch (const olat::ConfigError& e) {
    return fail(OLAT_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(OLAT_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(OLAT_INTERNAL, e.what());
  } catch (...) {
    return fail(OLAT_INTERNAL, "unknown error");
  }
}

template <class F>
olat_status guarded(F&& body) {
  try {
    body();
    return OLAT_OK;
  } catch (...) {
    return translate();
  }
}

#define OLAT_REQUIRE(cond, what) \
  if (!(cond)) return fail(OLAT_INVALID_ARGUMENT, what)

olat_status copy_text(const std::string& text, char* buf, size_t capacity, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf) return OLAT_OK;
  if (capacity < text.size() + 1) return fail(OLAT_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return OLAT_OK;
}

std::vector<olat::PointCloud> gather(const olat_cloud* const* clouds, size_t n) {
  std::vector<olat::PointCloud> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (!clouds[i]) throw olat::InvalidArgument("null cloud in set");
    out.push_back(clouds[i]->cloud);
  }
  return out;
}

}  // namespace

extern "C" {

const char* olat_last_error(void) { return g_last_error.c_str(); }

const char* olat_status_string(olat_status status) {
  switch (status) {
    case OLAT_OK: return "ok";
    case OLAT_INVALID_ARGUMENT: return "invalid argument";
    case OLAT_DEGENERATE: return "degenerate input";
    case OLAT_FORMAT: return "format error";
    case OLAT_IO: return "i/o error";
    case OLAT_NUMERIC: return "numeric error";
    case OLAT_CONFIG: return "configuration error";
    case OLAT_DIVERGED: return "training diverged";
    case OLAT_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* olat_version(void) { return "1.0.0"; }

olat_status olat_cloud_create(const double* xyz, size_t count, olat_cloud** out) {
  OLAT_REQUIRE(out, "out is null");
  OLAT_REQUIRE(xyz || count == 0, "xyz is null");
  *out = nullptr;
  return guarded([&] {
    *out = new olat_cloud{olat::PointCloud(std::vector<double>(xyz, xyz + 3 * count))};
  });
}

olat_status olat_cloud_read(const char* path, olat_cloud** out) {
  OLAT_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new olat_cloud{olat::io::read_cloud(path)}; });
}

olat_status olat_cloud_write(const olat_cloud* cloud, const char* path) {
  OLAT_REQUIRE(cloud && path, "null argument");
  return guarded([&] { olat::io::write_cloud(path, cloud->cloud); });
}

size_t olat_cloud_size(const olat_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

olat_status olat_cloud_copy(const olat_cloud* cloud, double* xyz, size_t capacity) {
  OLAT_REQUIRE(cloud && xyz, "null argument");
  const auto& data = cloud->cloud.xyz();
  OLAT_REQUIRE(capacity >= data.size(), "buffer too small");
  std::memcpy(xyz, data.data(), data.size() * sizeof(double));
  return OLAT_OK;
}

void olat_cloud_destroy(olat_cloud* cloud) { delete cloud; }

olat_status olat_chamfer(const olat_cloud* a, const olat_cloud* b, double* out) {
  OLAT_REQUIRE(a && b && out, "null argument");
  return guarded([&] { *out = olat::metrics::chamfer(a->cloud, b->cloud); });
}

olat_status olat_ucd(const olat_cloud* partial, const olat_cloud* predicted, double* out) {
  OLAT_REQUIRE(partial && predicted && out, "null argument");
  return guarded([&] { *out = olat::metrics::ucd(partial->cloud, predicted->cloud); });
}

olat_status olat_f1(const olat_cloud* predicted, const olat_cloud* truth, double tau, double* out) {
  OLAT_REQUIRE(predicted && truth && out, "null argument");
  return guarded([&] { *out = olat::metrics::f1(predicted->cloud, truth->cloud, tau); });
}

olat_status olat_mmd(const olat_cloud* const* completions, size_t n_completions, const olat_cloud* const* references,
                     size_t n_references, double* out) {
  OLAT_REQUIRE(out, "out is null");
  OLAT_REQUIRE((completions || n_completions == 0) && (references || n_references == 0), "null set");
  return guarded([&] {
    const auto c = gather(completions, n_completions);
    const auto r = gather(references, n_references);
    *out = olat::metrics::mmd(c, r);
  });
}

olat_status olat_config_create(olat_config** out) {
  OLAT_REQUIRE(out, "out is null");
  *out = nullptr;
  return guarded([&] { *out = new olat_config{}; });
}

olat_status olat_config_load_file(olat_config* cfg, const char* path) {
  OLAT_REQUIRE(cfg && path, "null argument");
  return guarded([&] {
    auto copy = cfg->cfg;
    olat::apply_config_file(copy, path);
    cfg->cfg = std::move(copy);
  });
}

olat_status olat_config_set(olat_config* cfg, const char* key, const char* value) {
  OLAT_REQUIRE(cfg && key && value, "null argument");
  return guarded([&] { olat::set_config_value(cfg->cfg, key, value); });
}

olat_status olat_config_get(const olat_config* cfg, const char* key, char* buf, size_t capacity, size_t* needed) {
  OLAT_REQUIRE(cfg && key, "null argument");
  std::string text;
  const auto st = guarded([&] { text = olat::get_config_value(cfg->cfg, key); });
  if (st != OLAT_OK) return st;
  return copy_text(text, buf, capacity, needed);
}

olat_status olat_config_echo(const olat_config* cfg, char* buf, size_t capacity, size_t* needed) {
  OLAT_REQUIRE(cfg, "null argument");
  return copy_text(olat::config_echo(cfg->cfg), buf, capacity, needed);
}

void olat_config_destroy(olat_config* cfg) { delete cfg; }

olat_status olat_gen_data(const olat_config* cfg, const char* run_dir) {
  OLAT_REQUIRE(cfg && run_dir, "null argument");
  return guarded([&] {
    cfg->cfg.validate();
    olat::write_config_echo(cfg->cfg, run_dir);
    olat::datagen::build_dataset(cfg->cfg, olat::data_dir_for(cfg->cfg, run_dir));
  });
}

olat_status olat_pretrain_ae(const olat_config* cfg, const char* run_dir) {
  OLAT_REQUIRE(cfg && run_dir, "null argument");
  return guarded([&] { olat::run_pretrain(cfg->cfg, run_dir); });
}

olat_status olat_train(const olat_config* cfg, const char* run_dir, const char* resume_checkpoint) {
  OLAT_REQUIRE(cfg && run_dir, "null argument");
  return guarded([&] { olat::run_train(cfg->cfg, run_dir, resume_checkpoint ? resume_checkpoint : ""); });
}

olat_status olat_eval(const olat_config* cfg, const char* run_dir, const char* eval_manifest) {
  OLAT_REQUIRE(cfg && run_dir, "null argument");
  return guarded([&] {
    cfg->cfg.validate();
    olat::write_config_echo(cfg->cfg, run_dir);
    olat::run_eval(cfg->cfg, run_dir, eval_manifest ? eval_manifest : "");
  });
}

olat_status olat_complete(const olat_config* cfg, const char* run_dir, const char* input, const char* checkpoint,
                          const char* output, int projection_panel, size_t* written) {
  OLAT_REQUIRE(cfg && run_dir && input, "null argument");
  return guarded([&] {
    const auto paths = olat::run_complete(cfg->cfg, run_dir, input, checkpoint ? checkpoint : "",
                                          output ? output : "", projection_panel);
    if (written) *written = paths.size();
  });
}

olat_status olat_model_load(const char* checkpoint_path, olat_model** out) {
  OLAT_REQUIRE(checkpoint_path && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto ckpt = olat::load_checkpoint(checkpoint_path);
    *out = new olat_model{ckpt.config, olat::parameter_set(ckpt, olat::models::Role::partial_encoder),
                          olat::parameter_set(ckpt, olat::models::Role::complete_decoder)};
  });
}

olat_status olat_model_complete(const olat_model* model, const olat_cloud* partial, olat_cloud** out) {
  OLAT_REQUIRE(model && partial && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new olat_cloud{olat::complete_cloud(model->encoder, model->decoder, model->cfg, partial->cloud)};
  });
}

void olat_model_destroy(olat_model* model) { delete model; }

olat_status olat_write_projection(const olat_cloud* cloud, const olat_cloud* overlay, int panel_size, const char* path) {
  OLAT_REQUIRE(cloud && path, "null argument");
  return guarded([&] {
    const auto img = olat::datagen::render_projection(cloud->cloud, panel_size, overlay ? &overlay->cloud : nullptr);
    olat::datagen::write_ppm(path, img);
  });
}

}  // extern "C"
