/* Copyright 2026 GASS toolkit authors
 * License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
 *
 * C API of the GASS toolkit: dynamic mixture synthesis, the thresholded
 * log-MSE PIT loss, the IRM oracle separator, SI-SDR based evaluation, and a
 * small trainable mask separator. Handles are opaque; every fallible call
 * returns a gass_status and leaves a message in gass_last_error().
 */

#ifndef GASS_H_
#define GASS_H_

#include <stdint.h>

#if defined(_WIN32)
#define GASS_API __declspec(dllexport)
#else
#define GASS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gass_status {
  GASS_OK = 0,
  GASS_ERR_INVALID_ARGUMENT = 1,
  GASS_ERR_FILE_NOT_FOUND = 2,
  GASS_ERR_MALFORMED_FILE = 3,
  GASS_ERR_UNSUPPORTED_FORMAT = 4,
  GASS_ERR_SILENT_SOURCE = 5,
  GASS_ERR_DATA = 6,
  GASS_ERR_INTERNAL = 7
} gass_status;

typedef struct gass_clip gass_clip;
typedef struct gass_catalog gass_catalog;
typedef struct gass_toy_model gass_toy_model;

GASS_API const char* gass_version(void);

/* Message of the most recent failure on this thread; never NULL. */
GASS_API const char* gass_last_error(void);

/* Frees strings returned through char** out parameters. */
GASS_API void gass_string_free(char* s);

/* ---- clips ------------------------------------------------------------ */

GASS_API gass_status gass_clip_create(const double* samples, int64_t length,
                                      int32_t sample_rate_hz, gass_clip** out);
GASS_API void gass_clip_free(gass_clip* clip);
GASS_API int64_t gass_clip_length(const gass_clip* clip);
GASS_API int32_t gass_clip_sample_rate(const gass_clip* clip);
GASS_API const double* gass_clip_samples(const gass_clip* clip);

GASS_API gass_status gass_read_wav(const char* path, gass_clip** out);
/* encoding: "float32" (bit-exact round trip) or "int16". clipped_out may be
 * NULL; for int16 it receives the number of saturated samples. */
GASS_API gass_status gass_write_wav(const char* path, const gass_clip* clip,
                                    const char* encoding, int64_t* clipped_out);

GASS_API gass_status gass_resample(const gass_clip* clip,
                                   int32_t target_rate_hz, gass_clip** out);
GASS_API gass_status gass_peak_normalize(const gass_clip* clip,
                                         gass_clip** out);
GASS_API gass_status gass_mean_energy_db(const gass_clip* clip, double* out);

/* ---- source catalog ---------------------------------------------------- */

GASS_API gass_status gass_catalog_load(const char* manifest_path, int skip_bad,
                                       gass_catalog** out);
GASS_API void gass_catalog_free(gass_catalog* catalog);
GASS_API int64_t gass_catalog_size(const gass_catalog* catalog);
/* source_type: speech_fg | event_fg | event_bg | music_fg | music_bg */
GASS_API int64_t gass_catalog_count(const gass_catalog* catalog,
                                    const char* source_type);

/* ---- pipeline ---------------------------------------------------------- */

/* config_json may be NULL/empty for defaults; fields mirror the mix config
 * (task_probs, k_min/k_max, duration_s, sample_rate_hz, gain_ranges_db,
 * beta_params, max_bg_per_type). report_json receives a summary. */
GASS_API gass_status gass_generate_dataset(const gass_catalog* catalog,
                                           const char* config_json,
                                           int64_t num_mixes, uint64_t seed,
                                           const char* out_dir, int workers,
                                           char** report_json);

/* Runs the IRM oracle over a generated dataset; writes est1..4.wav per mix.
 * config_json may override {"frame_len": n, "hop": n}. */
GASS_API gass_status gass_oracle_irm_run(const char* mix_dir,
                                         const char* out_dir,
                                         const char* config_json,
                                         char** report_json);

/* metrics_csv: comma-separated subset of "sisdr,counting,chunked-sdr"
 * (NULL/empty means "sisdr,counting"). native_rate_hz 0 uses the reference
 * rate. report_path may be NULL to skip the JSONL file. */
GASS_API gass_status gass_evaluate(const char* ref_dir, const char* est_dir,
                                   int32_t native_rate_hz,
                                   const char* metrics_csv,
                                   const char* report_path, int workers,
                                   char** aggregate_json);

/* PIT loss of est1..4.wav in est_dir against one generated mix directory. */
GASS_API gass_status gass_loss_dirs(const char* ref_dir, const char* est_dir,
                                    double tau_db, char** result_json);

/* Validates a meta.json against the configured gain ranges; returns
 * GASS_ERR_DATA when a gain falls outside its range. */
GASS_API gass_status gass_inspect_meta(const char* meta_path,
                                       const char* config_json,
                                       char** result_json);

/* ---- loss and metrics on raw buffers ----------------------------------- */

/* All buffers have `length` samples. perm_out[e] is the target index paired
 * with estimate e; per_pair_out holds the per-pair losses. Either may be
 * NULL. */
GASS_API gass_status gass_pit_loss(const double* const targets[4],
                                   const double* const estimates[4],
                                   const double* mixture, int64_t length,
                                   double tau_db, double* loss_out,
                                   int32_t perm_out[4], double per_pair_out[4]);

GASS_API gass_status gass_si_sdr(const double* reference,
                                 const double* estimate, int64_t length,
                                 double* out);

/* ---- toy separator ------------------------------------------------------ */

/* train_config_json fields: learning_rate, steps, batch_size, seed, tau_db,
 * momentum. curve_json receives the per-step loss curve. */
GASS_API gass_status gass_toy_train(const char* data_dir,
                                    const char* train_config_json,
                                    const char* model_out_path,
                                    char** curve_json);

GASS_API gass_status gass_toy_model_load(const char* path,
                                         gass_toy_model** out);
GASS_API void gass_toy_model_free(gass_toy_model* model);

/* estimates_out receives 4 new clips owned by the caller. */
GASS_API gass_status gass_toy_separate(const gass_toy_model* model,
                                       const gass_clip* mixture,
                                       gass_clip* estimates_out[4]);

/* Finite-difference gradient check; GASS_OK only when every instance is
 * within tolerance. */
GASS_API gass_status gass_grad_check(uint64_t seed, int instances,
                                     char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* GASS_H_ */
