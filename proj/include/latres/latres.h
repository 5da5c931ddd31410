// Copyright 2026 The latres Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LATRES_LATRES_H_
#define LATRES_LATRES_H_

#include <stddef.h>

#if defined(_WIN32)
#define LATRES_API __declspec(dllexport)
#elif defined(__GNUC__)
#define LATRES_API __attribute__((visibility("default")))
#else
#define LATRES_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum latres_status {
  LATRES_OK = 0,
  LATRES_ERR_INTERNAL = 1,
  LATRES_ERR_USAGE = 2,
  LATRES_ERR_DATA = 3,
  LATRES_ERR_NUMERIC = 4
} latres_status;

typedef enum latres_task { LATRES_TASK_CLASS = 0, LATRES_TASK_REG = 1 } latres_task;

typedef struct latres_config latres_config;
typedef struct latres_plane latres_plane;
typedef struct latres_model latres_model;

/* Message of the last failed call on this thread; "" when none. */
LATRES_API const char* latres_last_error(void);
LATRES_API const char* latres_version(void);

/* String outputs: up to cap-1 bytes plus NUL are written to buf (which may
 * be NULL when cap is 0); *needed receives the full length + 1. */

LATRES_API latres_status latres_config_new(latres_config** out);
LATRES_API void latres_config_free(latres_config* cfg);
LATRES_API latres_status latres_config_set(latres_config* cfg, const char* key,
                                           const char* value);
LATRES_API latres_status latres_config_get(const latres_config* cfg,
                                           const char* key, char* buf,
                                           size_t cap, size_t* needed);
/* Merges a `key = value` file over the current values. */
LATRES_API latres_status latres_config_merge_file(latres_config* cfg,
                                                  const char* path);
LATRES_API latres_status latres_config_text(const latres_config* cfg,
                                            char* buf, size_t cap,
                                            size_t* needed);
LATRES_API latres_status latres_config_validate(const latres_config* cfg);

/* Luma plane, samples in [0,1], row-major. */
LATRES_API latres_status latres_plane_load(const char* path,
                                           latres_plane** out);
LATRES_API latres_status latres_plane_new(size_t height, size_t width,
                                          const float* samples,
                                          latres_plane** out);
LATRES_API void latres_plane_free(latres_plane* plane);
LATRES_API size_t latres_plane_height(const latres_plane* plane);
LATRES_API size_t latres_plane_width(const latres_plane* plane);

LATRES_API latres_status latres_model_load(const char* path,
                                           latres_model** out);
LATRES_API void latres_model_free(latres_model* model);
/* "softmax", "mask-softmax" or "mask". */
LATRES_API const char* latres_model_kind(const latres_model* model);
/* Config the checkpoint was trained with. Caller frees. */
LATRES_API latres_status latres_model_config(const latres_model* model,
                                             latres_config** out);

typedef struct latres_prediction {
  latres_task task;
  int cls;             /* 1..6 */
  double value;        /* regression estimate of k; 1.0 for classifiers */
  int low_confidence;  /* few corners or fallback verdict */
  size_t corners;      /* summed over frames */
  size_t frames;
} latres_prediction;

/* cfg may be NULL to use the checkpoint's own config. */
LATRES_API latres_status latres_predict_plane(latres_model* model,
                                              const latres_config* cfg,
                                              const latres_plane* plane,
                                              latres_prediction* out);
/* An image file, or a directory of frames treated as one video. */
LATRES_API latres_status latres_predict_path(latres_model* model,
                                             const latres_config* cfg,
                                             const char* path,
                                             latres_prediction* out);

/* "144p" .. "1080p"; NULL outside 1..6. */
LATRES_API const char* latres_class_name(int cls);

LATRES_API latres_status latres_shape_fn(size_t side, size_t* out);
/* Layer listing for a head with head_channels outputs. */
LATRES_API latres_status latres_describe_architecture(size_t head_channels,
                                                      char* buf, size_t cap,
                                                      size_t* needed);

typedef struct latres_synth_summary {
  size_t sources;
  size_t entries;
  size_t patches_train;
  size_t patches_val;
  size_t patches_test;
} latres_synth_summary;

LATRES_API latres_status latres_synth(const latres_config* cfg,
                                      const char* corpus_dir,
                                      const char* out_dir,
                                      latres_synth_summary* summary);

typedef struct latres_epoch {
  size_t epoch;
  double train_metric;
  double val_metric;
  double test_metric;
  double lr;
  size_t batch_size;
  double train_loss;
} latres_epoch;

typedef void (*latres_epoch_fn)(const latres_epoch* epoch, void* user);
typedef void (*latres_progress_fn)(size_t done, size_t total, void* user);

LATRES_API latres_status latres_train(const latres_config* cfg,
                                      const char* dataset_dir,
                                      const char* out_dir,
                                      latres_epoch_fn on_epoch, void* user);

/* baseline_model may be NULL. */
LATRES_API latres_status latres_eval(const latres_config* cfg,
                                     const char* dataset_dir,
                                     const char* model_path,
                                     const char* baseline_model,
                                     const char* out_dir,
                                     latres_progress_fn progress, void* user);
LATRES_API latres_status latres_sweep(const latres_config* cfg,
                                      const char* dataset_dir,
                                      const char* model_path,
                                      const char* out_dir,
                                      latres_progress_fn progress, void* user);
LATRES_API latres_status latres_features(const latres_config* cfg,
                                         const char* dataset_dir,
                                         const char* model_path,
                                         const char* out_dir,
                                         latres_progress_fn progress,
                                         void* user);

#ifdef __cplusplus
}
#endif

#endif  // LATRES_LATRES_H_
