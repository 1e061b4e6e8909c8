/* SPDX-License-Identifier: Apache-2.0 */
/**
 * @file   fastssl.h
 * @brief  C interface of the fastssl library.
 *
 * Every function returns a fastssl_status. On failure the message of the
 * most recent error on the calling thread is available from
 * fastssl_last_error(). Strings handed out through `char **` parameters are
 * owned by the caller and released with fastssl_string_free().
 */
#ifndef FASTSSL_H_
#define FASTSSL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FASTSSL_API __declspec(dllexport)
#else
#define FASTSSL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fastssl_status {
  FASTSSL_OK = 0,
  FASTSSL_ERR_CONFIG = 1,    /**< invalid configuration value */
  FASTSSL_ERR_RANGE = 2,     /**< step or index out of range */
  FASTSSL_ERR_SELECTION = 3, /**< hard-augment selection failed */
  FASTSSL_ERR_NUMERIC = 4,   /**< non-finite value or singular quantity */
  FASTSSL_ERR_PROFILE = 5,   /**< FLOPs profile lookup failed */
  FASTSSL_ERR_IO = 6,        /**< file could not be read or written */
  FASTSSL_ERR_ARGUMENT = 7,  /**< null pointer or bad argument */
  FASTSSL_ERR_INTERNAL = 8
} fastssl_status;

FASTSSL_API const char *fastssl_version(void);
FASTSSL_API const char *fastssl_status_name(fastssl_status status);
/** Message of the last failure on this thread; empty after a success. */
FASTSSL_API const char *fastssl_last_error(void);
FASTSSL_API void fastssl_string_free(char *s);

/* ---- configuration ---------------------------------------------------- */

typedef struct fastssl_config fastssl_config;

/** Default configuration (the efficient desk-scale setup). */
FASTSSL_API fastssl_status fastssl_config_create(fastssl_config **out);
/** Parses `key = value` text; errors name the line and key. */
FASTSSL_API fastssl_status fastssl_config_parse(const char *text,
                                                fastssl_config **out);
FASTSSL_API fastssl_status fastssl_config_load(const char *path,
                                               fastssl_config **out);
FASTSSL_API fastssl_status fastssl_config_clone(const fastssl_config *cfg,
                                                fastssl_config **out);
FASTSSL_API void fastssl_config_destroy(fastssl_config *cfg);

/** Assigns one key without cross-field validation. */
FASTSSL_API fastssl_status fastssl_config_set(fastssl_config *cfg,
                                              const char *key,
                                              const char *value);
FASTSSL_API fastssl_status fastssl_config_get(const fastssl_config *cfg,
                                              const char *key, char **value);
FASTSSL_API fastssl_status fastssl_config_validate(const fastssl_config *cfg);
FASTSSL_API fastssl_status fastssl_config_render(const fastssl_config *cfg,
                                                 char **text);
/** Total training iterations implied by the configuration. */
FASTSSL_API fastssl_status fastssl_config_total_steps(const fastssl_config *cfg,
                                                      int64_t *steps);

/** Replaces `cfg` with the baseline or efficient preset built on it. */
FASTSSL_API fastssl_status fastssl_config_apply_preset(fastssl_config *cfg,
                                                       const char *preset);

/* ---- schedules ---------------------------------------------------------- */

typedef struct fastssl_schedule_point {
  int64_t step;
  double lr;
  double momentum;
  int32_t resolution;
  double magnitude;
} fastssl_schedule_point;

FASTSSL_API fastssl_status fastssl_schedule_at(const fastssl_config *cfg,
                                               int64_t step,
                                               fastssl_schedule_point *out);
/** CSV with header step,lr,momentum,resolution,aug_magnitude. */
FASTSSL_API fastssl_status fastssl_emit_schedule(const fastssl_config *cfg,
                                                 const char *path);

/* ---- hard augment -------------------------------------------------------- */

FASTSSL_API fastssl_status fastssl_selection_overhead(int32_t train_resolution,
                                                      int32_t selection_resolution,
                                                      int32_t num_positives,
                                                      double cost_ratio,
                                                      double *speed_factor,
                                                      double *overhead);
/**
 * Writes the C(m,2) pairs as (i, j) integer pairs into `pairs`, which must
 * hold 2 * capacity entries. `count` receives the number of pairs; when it
 * exceeds `capacity` nothing is written and FASTSSL_ERR_ARGUMENT is returned.
 */
FASTSSL_API fastssl_status fastssl_enumerate_pairs(int32_t num_positives,
                                                   int32_t *pairs,
                                                   size_t capacity,
                                                   size_t *count);
/** Index of the largest loss among C(m,2) pair losses (ties: lowest). */
FASTSSL_API fastssl_status fastssl_select_hardest(const double *losses,
                                                  size_t num_losses,
                                                  int32_t num_positives,
                                                  int32_t *i, int32_t *j);

/* ---- cost model ---------------------------------------------------------- */

/**
 * Compares the training plans of two configurations. `profile_json` may be
 * NULL (analytic FLOPs of the configured model) or a JSON object
 * {"cost_ratio": C, "forward_flops": {"<res>": flops, ...}}.
 * Either output pointer may be NULL.
 */
FASTSSL_API fastssl_status fastssl_estimate_cost(const fastssl_config *baseline,
                                                 const fastssl_config *efficient,
                                                 const char *profile_json,
                                                 char **table, char **json);

/* ---- learning-rate range test ------------------------------------------- */

typedef struct fastssl_range_options {
  double lr_lo;
  double lr_hi;
  int64_t sweep_steps;
  int64_t val_batch_size;
  double smoothing_coefficient;
  double divergence_factor;
  double decrease_delta;
  int32_t persistence;
  double loss_offset;
} fastssl_range_options;

typedef struct fastssl_range_result {
  double min_lr;
  double max_lr;
  int32_t min_detected;
  int32_t diverged;
  int64_t divergence_step;
} fastssl_range_result;

FASTSSL_API void fastssl_range_options_default(fastssl_range_options *opts);
/** Runs the test on the configured model; `trace_path` may be NULL. */
FASTSSL_API fastssl_status fastssl_lr_find(const fastssl_config *cfg,
                                           const fastssl_range_options *opts,
                                           const char *trace_path,
                                           fastssl_range_result *out);

/* ---- training ------------------------------------------------------------ */

typedef void (*fastssl_log_fn)(const char *line, void *user);

typedef struct fastssl_run_summary {
  double knn_accuracy;
  double cumulative_flops;
  double baseline_flops;
  int64_t steps;
  double embedding_std;
} fastssl_run_summary;

/**
 * Trains one run into `out_dir` (config, schedule, metrics, cost report and
 * checkpoint). `log` may be NULL.
 */
FASTSSL_API fastssl_status fastssl_train(const fastssl_config *cfg,
                                         const char *out_dir,
                                         fastssl_log_fn log, void *user,
                                         fastssl_run_summary *out);

/** kNN accuracy of a checkpoint's encoder on the configured dataset. */
FASTSSL_API fastssl_status fastssl_eval(const fastssl_config *cfg,
                                        const char *checkpoint_prefix,
                                        int32_t k, double *accuracy);

/** Comma-separated preset names. */
FASTSSL_API fastssl_status fastssl_preset_names(char **names);

/**
 * Runs a named preset on top of `base`. `keys`/`values` are config
 * overrides applied to every run. `summary` (nullable) receives the
 * summary table.
 */
FASTSSL_API fastssl_status fastssl_experiment(const fastssl_config *base,
                                              const char *preset,
                                              const char *const *keys,
                                              const char *const *values,
                                              size_t num_overrides,
                                              const char *out_dir,
                                              fastssl_log_fn log, void *user,
                                              char **summary);

#ifdef __cplusplus
}
#endif

#endif /* FASTSSL_H_ */
