/* C interface for the d2d-sim simulator. */

#ifndef D2D_SIM_H
#define D2D_SIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define D2D_OK 0

#define D2D_ERR_NULL_POINTER -1

#define D2D_ERR_UTF8 -2

#define D2D_ERR_INVALID_CONFIG -3

#define D2D_ERR_PARSE -4

#define D2D_ERR_IO -5

#define D2D_ERR_DOMAIN -6

#define D2D_ERR_PANIC -7

/**
 * Opaque experiment configuration.
 */
typedef struct D2dConfig D2dConfig;

/**
 * Opaque trained policy.
 */
typedef struct D2dModel D2dModel;

/**
 * One evaluation result.
 */
typedef struct D2dMetrics {
  double system_throughput_bps_hz;
  double d2d_throughput_bps_hz;
  double cue_qos_rate;
} D2dMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *d2d_version(void);

/**
 * Message for the most recent failure on this thread, or null if the last
 * call succeeded. The pointer is valid until the next call on this thread.
 */
const char *d2d_last_error_message(void);

/**
 * Creates a configuration with every parameter at its default.
 *
 * # Safety
 * `out` must be null or a valid pointer to a `D2dConfig*` slot.
 */
int d2d_config_new(struct D2dConfig **out);

/**
 * Loads and validates a `key = value` configuration file.
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or a
 * valid pointer to a `D2dConfig*` slot.
 */
int d2d_config_load(const char *path, struct D2dConfig **out);

/**
 * Applies one `key = value` assignment to a configuration. Values are
 * validated when the configuration is used.
 *
 * # Safety
 * `config` must be null or a live handle from `d2d_config_new`/`_load`;
 * `key` and `value` must be null or NUL-terminated strings.
 */
int d2d_config_set(struct D2dConfig *config, const char *key, const char *value);

/**
 * Releases a configuration handle. Null is a no-op.
 *
 * # Safety
 * `config` must be null or a live handle, not yet freed.
 */
void d2d_config_free(struct D2dConfig *config);

/**
 * Trains a DQN policy with `config`'s cell size and hyperparameters under
 * the given seed and returns the trained model.
 *
 * # Safety
 * `config` must be null or a live handle; `out` must be null or a valid
 * pointer to a `D2dModel*` slot.
 */
int d2d_train(const struct D2dConfig *config, uint64_t seed, struct D2dModel **out);

/**
 * Writes a model to disk in the versioned weight format.
 *
 * # Safety
 * `model` must be null or a live handle; `path` must be null or a
 * NUL-terminated string.
 */
int d2d_model_save(const struct D2dModel *model, const char *path);

/**
 * Loads a model saved by [`d2d_model_save`] (or the CLI).
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or a
 * valid pointer to a `D2dModel*` slot.
 */
int d2d_model_load(const char *path, struct D2dModel **out);

/**
 * Releases a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must be null or a live handle, not yet freed.
 */
void d2d_model_free(struct D2dModel *model);

/**
 * Scores `algorithm` ("dqn", "max_power", or "olpc") on held-out
 * topologies drawn from `seed`. `model` may be null for the baselines and
 * is required for "dqn".
 *
 * # Safety
 * `config` and `model` must each be null or live handles; `algorithm` must
 * be null or a NUL-terminated string; `out` must be null or a valid
 * `D2dMetrics` pointer.
 */
int d2d_evaluate(const struct D2dConfig *config,
                 const char *algorithm,
                 const struct D2dModel *model,
                 uint64_t seed,
                 struct D2dMetrics *out);

/**
 * Runs the configured sweep and writes the result rows as CSV to `path`.
 *
 * # Safety
 * `config` must be null or a live handle; `path` must be null or a
 * NUL-terminated string.
 */
int d2d_sweep_to_csv(const struct D2dConfig *config, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* D2D_SIM_H */
