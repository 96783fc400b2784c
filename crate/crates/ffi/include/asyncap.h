#ifndef ASYNCAP_H
#define ASYNCAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AsyncapStatus {
  ASYNCAP_STATUS_OK = 0,
  ASYNCAP_STATUS_NULL_POINTER = 1,
  ASYNCAP_STATUS_INVALID_ARGUMENT = 2,
  ASYNCAP_STATUS_INVALID_CHANNEL = 3,
  ASYNCAP_STATUS_RATE_OUT_OF_RANGE = 4,
  ASYNCAP_STATUS_INFEASIBLE = 5,
  ASYNCAP_STATUS_INVALID_CONFIG = 6,
  ASYNCAP_STATUS_NO_CONVERGENCE = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  ASYNCAP_STATUS_INTERNAL = 8,
} AsyncapStatus;

typedef enum AsyncapScheme {
  ASYNCAP_SCHEME_JOINT = 0,
  ASYNCAP_SCHEME_TRAINING = 1,
  ASYNCAP_SCHEME_GENIE = 2,
} AsyncapScheme;

/**
 * Opaque channel handle.
 */
typedef struct AsyncapChannel AsyncapChannel;

typedef struct AsyncapGrid {
  double simplex_step;
  double delta_step;
  uint32_t refine_rounds;
  uint64_t seed;
  size_t starts;
} AsyncapGrid;

typedef struct AsyncapTrainingBounds {
  double lower;
  double upper;
  double eta;
  double m1;
  double m2;
} AsyncapTrainingBounds;

/**
 * Simulation parameters. `mu` and `eta` are ignored when NaN; `input_dist`
 * may be NULL for the capacity-achieving default.
 */
typedef struct AsyncapSimConfig {
  enum AsyncapScheme scheme;
  size_t n;
  double alpha;
  size_t messages;
  size_t trials;
  uint64_t seed;
  double mu;
  double eta;
  const double *input_dist;
  size_t input_dist_len;
  uint64_t max_async_level;
  /**
   * 0 selects the default worker count.
   */
  size_t threads;
} AsyncapSimConfig;

typedef struct AsyncapSimResult {
  double max_error_rate;
  double avg_error_rate;
  double mean_reaction_delay;
  double empirical_rate;
  double false_alarm_rate;
  double miss_rate;
  double ci_halfwidth;
  size_t trials_per_message;
  uint64_t async_level;
  bool async_level_clamped;
  size_t preamble_len;
} AsyncapSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *asyncap_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *asyncap_last_error(void);

/**
 * Default search grid.
 */
struct AsyncapGrid asyncap_grid_default(void);

/**
 * Builds a channel from a row-major `inputs x outputs` matrix.
 *
 * # Safety
 * `rows` must point to `inputs * outputs` readable doubles and `out` must be
 * a valid pointer to write the handle to.
 */
enum AsyncapStatus asyncap_channel_new(const double *rows,
                                       size_t inputs,
                                       size_t outputs,
                                       size_t star,
                                       struct AsyncapChannel **out);

/**
 * Parses a JSON channel file.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AsyncapStatus asyncap_channel_from_json(const char *json, struct AsyncapChannel **out);

/**
 * Loads a bundled channel (`fig3`, `fig4`, `zchannel`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AsyncapStatus asyncap_channel_bundled(const char *name, struct AsyncapChannel **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `ch` must be NULL or a handle from this library that was not yet freed.
 */
void asyncap_channel_free(struct AsyncapChannel *ch);

/**
 * Number of inputs including the no-input symbol; 0 for NULL.
 *
 * # Safety
 * `ch` must be NULL or a live handle.
 */
size_t asyncap_channel_inputs(const struct AsyncapChannel *ch);

/**
 * Number of outputs; 0 for NULL.
 *
 * # Safety
 * `ch` must be NULL or a live handle.
 */
size_t asyncap_channel_outputs(const struct AsyncapChannel *ch);

/**
 * Synchronous capacity in nats.
 *
 * # Safety
 * `ch` must be a live handle and `out` a valid pointer.
 */
enum AsyncapStatus asyncap_capacity(const struct AsyncapChannel *ch, double *out);

/**
 * Synchronization threshold; may be infinite.
 *
 * # Safety
 * `ch` must be a live handle and `out` a valid pointer.
 */
enum AsyncapStatus asyncap_sync_threshold(const struct AsyncapChannel *ch, double *out);

/**
 * Achievable asynchronism exponent at `rate`. `grid` may be NULL.
 *
 * # Safety
 * `ch` must be a live handle, `grid` NULL or valid, `out` a valid pointer.
 */
enum AsyncapStatus asyncap_lower_bound(const struct AsyncapChannel *ch,
                                       double rate,
                                       const struct AsyncapGrid *grid,
                                       double *out);

/**
 * Converse asynchronism exponent at `rate`. `grid` may be NULL.
 *
 * # Safety
 * `ch` must be a live handle, `grid` NULL or valid, `out` a valid pointer.
 */
enum AsyncapStatus asyncap_upper_bound(const struct AsyncapChannel *ch,
                                       double rate,
                                       const struct AsyncapGrid *grid,
                                       double *out);

/**
 * Exponent of the infinite-threshold case. `grid` may be NULL.
 *
 * # Safety
 * `ch` must be a live handle, `grid` NULL or valid, `out` a valid pointer.
 */
enum AsyncapStatus asyncap_alpha_bar(const struct AsyncapChannel *ch,
                                     const struct AsyncapGrid *grid,
                                     double *out);

/**
 * Training-scheme bounds at `rate`. `grid` may be NULL.
 *
 * # Safety
 * `ch` must be a live handle, `grid` NULL or valid, `out` a valid pointer.
 */
enum AsyncapStatus asyncap_training_bounds(const struct AsyncapChannel *ch,
                                           double rate,
                                           const struct AsyncapGrid *grid,
                                           struct AsyncapTrainingBounds *out);

/**
 * Min-max divergence between two distributions of length `len`, with the
 * maximizing tilt written to `lambda` when it is not NULL.
 *
 * # Safety
 * `p0` and `p1` must point to `len` readable doubles; `value` must be valid.
 */
enum AsyncapStatus asyncap_chernoff(const double *p0,
                                    const double *p1,
                                    size_t len,
                                    double *value,
                                    double *lambda);

/**
 * Achievability exponent of the unit-noise Gaussian channel under `power`,
 * with outputs quantized to `range / cell` cells.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AsyncapStatus asyncap_gaussian_lower_bound(double power,
                                                double rate,
                                                double range,
                                                double cell,
                                                double *out);

/**
 * Configuration with library defaults for `scheme`; `eta` still has to be
 * set for the training scheme.
 */
struct AsyncapSimConfig asyncap_sim_config_default(enum AsyncapScheme scheme);

/**
 * Runs a Monte-Carlo experiment.
 *
 * # Safety
 * `ch` must be a live handle, `cfg` and `out` valid pointers, and
 * `cfg->input_dist` NULL or pointing to `cfg->input_dist_len` doubles.
 */
enum AsyncapStatus asyncap_simulate(const struct AsyncapChannel *ch,
                                    const struct AsyncapSimConfig *cfg,
                                    struct AsyncapSimResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASYNCAP_H */
