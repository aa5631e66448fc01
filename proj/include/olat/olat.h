/* Copyright 2026 The olat Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the olat point cloud completion library.
 *
 * Every function returns an olat_status. On failure, olat_last_error()
 * describes the most recent error on the calling thread. Objects are opaque
 * handles released with their matching *_destroy function; destroy functions
 * accept NULL.
 */
#ifndef OLAT_OLAT_H_
#define OLAT_OLAT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(OLAT_BUILDING_LIBRARY)
#define OLAT_API __declspec(dllexport)
#else
#define OLAT_API __declspec(dllimport)
#endif
#else
#define OLAT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum olat_status {
  OLAT_OK = 0,
  OLAT_INVALID_ARGUMENT = 1,
  OLAT_DEGENERATE = 2,
  OLAT_FORMAT = 3,
  OLAT_IO = 4,
  OLAT_NUMERIC = 5,
  OLAT_CONFIG = 6,
  OLAT_DIVERGED = 7,
  OLAT_INTERNAL = 8
} olat_status;

typedef struct olat_cloud olat_cloud;
typedef struct olat_config olat_config;
typedef struct olat_model olat_model;

/* Message of the last failure on this thread ("" if none). Valid until the
 * next failing call on the same thread. */
OLAT_API const char* olat_last_error(void);
OLAT_API const char* olat_status_string(olat_status status);
OLAT_API const char* olat_version(void);

/* ---- Point clouds ---------------------------------------------------- */

/* Copies `count` xyz triples (3 * count doubles). */
OLAT_API olat_status olat_cloud_create(const double* xyz, size_t count, olat_cloud** out);
/* Reads PCB1 binary or ASCII "x y z" files (detected by content). */
OLAT_API olat_status olat_cloud_read(const char* path, olat_cloud** out);
/* Format by extension: .xyz / .txt are ASCII, anything else PCB1 binary. */
OLAT_API olat_status olat_cloud_write(const olat_cloud* cloud, const char* path);
OLAT_API size_t olat_cloud_size(const olat_cloud* cloud);
/* Copies up to `capacity` doubles of xyz data into `xyz`. */
OLAT_API olat_status olat_cloud_copy(const olat_cloud* cloud, double* xyz, size_t capacity);
OLAT_API void olat_cloud_destroy(olat_cloud* cloud);

/* ---- Metrics (normalized coordinates, unscaled) ----------------------- */

OLAT_API olat_status olat_chamfer(const olat_cloud* a, const olat_cloud* b, double* out);
OLAT_API olat_status olat_ucd(const olat_cloud* partial, const olat_cloud* predicted, double* out);
OLAT_API olat_status olat_f1(const olat_cloud* predicted, const olat_cloud* truth, double tau, double* out);
OLAT_API olat_status olat_mmd(const olat_cloud* const* completions, size_t n_completions,
                              const olat_cloud* const* references, size_t n_references, double* out);

/* ---- Configuration ------------------------------------------------------ */

/* Full-scale defaults. */
OLAT_API olat_status olat_config_create(olat_config** out);
/* Applies `key = value` lines from a file on top of the current values. */
OLAT_API olat_status olat_config_load_file(olat_config* cfg, const char* path);
OLAT_API olat_status olat_config_set(olat_config* cfg, const char* key, const char* value);
/* Writes the value as text into buf (NUL-terminated). If `needed` is non-NULL
 * it receives the full length including the terminator. */
OLAT_API olat_status olat_config_get(const olat_config* cfg, const char* key, char* buf, size_t capacity,
                                     size_t* needed);
/* Full `key = value` echo; same buffer protocol as olat_config_get. */
OLAT_API olat_status olat_config_echo(const olat_config* cfg, char* buf, size_t capacity, size_t* needed);
OLAT_API void olat_config_destroy(olat_config* cfg);

/* ---- Pipeline (run directory) -------------------------------------------- */

/* Generates the synthetic dataset into the config's data_dir (default
 * <run_dir>/data). */
OLAT_API olat_status olat_gen_data(const olat_config* cfg, const char* run_dir);
OLAT_API olat_status olat_pretrain_ae(const olat_config* cfg, const char* run_dir);
/* resume_checkpoint may be NULL. Returns OLAT_DIVERGED on a non-finite loss
 * after saving the last finite state. */
OLAT_API olat_status olat_train(const olat_config* cfg, const char* run_dir, const char* resume_checkpoint);
/* Writes <run_dir>/report.csv. eval_manifest may be NULL for the default. */
OLAT_API olat_status olat_eval(const olat_config* cfg, const char* run_dir, const char* eval_manifest);

/* ---- Inference ------------------------------------------------------------- */

/* Completes a cloud file or every partial entry of a manifest. `checkpoint`
 * and `output` may be NULL for the run-directory defaults (single input:
 * <run_dir>/completed.pcb; manifest: <run_dir>/completions/<category>/).
 * projection_panel > 0 also writes a .ppm projection per output. */
OLAT_API olat_status olat_complete(const olat_config* cfg, const char* run_dir, const char* input,
                                   const char* checkpoint, const char* output, int projection_panel,
                                   size_t* written);

OLAT_API olat_status olat_model_load(const char* checkpoint_path, olat_model** out);
OLAT_API olat_status olat_model_complete(const olat_model* model, const olat_cloud* partial, olat_cloud** out);
OLAT_API void olat_model_destroy(olat_model* model);

/* Three orthographic panels (XY, XZ, ZY) as a binary PPM image. `overlay`
 * may be NULL. */
OLAT_API olat_status olat_write_projection(const olat_cloud* cloud, const olat_cloud* overlay, int panel_size,
                                           const char* path);

#ifdef __cplusplus
}
#endif

#endif /* OLAT_OLAT_H_ */
