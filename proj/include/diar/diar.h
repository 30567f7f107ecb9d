/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the diarization toolkit. All functions return a
 * diar_status; on failure diar_last_error() describes the problem for the
 * calling thread. Strings are UTF-8 paths or text and are copied.
 */
#ifndef DIAR_DIAR_H
#define DIAR_DIAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(DIAR_BUILDING_LIBRARY)
#define DIAR_API __attribute__((visibility("default")))
#else
#define DIAR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum diar_status {
  DIAR_OK = 0,
  DIAR_E_USAGE = 1,
  DIAR_E_INVALID_ARGUMENT = 2,
  DIAR_E_IO = 3,
  DIAR_E_UNSUPPORTED_FORMAT = 4,
  DIAR_E_TRUNCATED = 5,
  DIAR_E_MALFORMED = 6,
  DIAR_E_SILENT_CHANNEL = 7,
  DIAR_E_SHAPE_MISMATCH = 8,
  DIAR_E_INTERNAL = 99
} diar_status;

typedef struct diar_config diar_config;
typedef struct diar_model diar_model;

/* Receives one line of progress or result text. */
typedef void (*diar_line_fn)(const char* line, void* user);

DIAR_API const char* diar_version(void);
DIAR_API const char* diar_status_name(diar_status status);
/* Message of the last failed call on this thread ("" if none). */
DIAR_API const char* diar_last_error(void);

/* Routes library warnings and info messages; NULL restores stderr. */
DIAR_API void diar_set_log_callback(diar_line_fn fn, void* user);

/* Settings: key=value pairs with built-in defaults. */
DIAR_API diar_status diar_config_create(diar_config** out);
DIAR_API void diar_config_destroy(diar_config* config);
/* Merges a key=value file; later keys win. */
DIAR_API diar_status diar_config_load(diar_config* config, const char* path);
DIAR_API diar_status diar_config_set(diar_config* config, const char* key, const char* value);
/* Copies the effective value into buf (NUL-terminated); *needed gets the
 * full length including the terminator. */
DIAR_API diar_status diar_config_get(const diar_config* config, const char* key, char* buf, size_t buf_size,
                                     size_t* needed);

DIAR_API diar_status diar_normalize(const diar_config* config, const char* const* inputs, size_t n_inputs,
                                    const char* out_dir);
DIAR_API diar_status diar_synth(const diar_config* config, const char* out_dir);
DIAR_API diar_status diar_prepare(const diar_config* config, const char* data_dir, const char* out_dir,
                                  diar_line_fn progress, void* user);
DIAR_API diar_status diar_train(const diar_config* config, const char* prepared_dir, const char* out_dir,
                                diar_line_fn progress, void* user);
/* Emits "file_id<TAB>accuracy" per file, then "MEAN<TAB>accuracy". */
DIAR_API diar_status diar_evaluate(const char* model_path, const char* prepared_dir, const char* split,
                                   diar_line_fn out, void* user);
DIAR_API diar_status diar_predict(const char* model_path, const char* wav_path, const char* out_csv);
/* to < 0 means the end of the file. */
DIAR_API diar_status diar_plot(const char* model_path, const char* wav_path, const char* csv_path, int channel,
                               long from_segment, long to_segment, const char* out_svg);

DIAR_API diar_status diar_measure_dbfs(const double* samples, size_t n, double* out_dbfs);

DIAR_API diar_status diar_model_load(const char* path, diar_model** out);
DIAR_API void diar_model_free(diar_model* model);
DIAR_API size_t diar_model_input_size(const diar_model* model);
/* Classes for n_rows rows of diar_model_input_size() values each. */
DIAR_API diar_status diar_model_predict(const diar_model* model, const double* rows, size_t n_rows, int* classes);

#ifdef __cplusplus
}
#endif

#endif
