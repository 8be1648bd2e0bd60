#ifndef BIRUIN_H
#define BIRUIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define BIRUIN_OK 0

#define BIRUIN_ERR_NULL -1

#define BIRUIN_ERR_INVALID_ARGUMENT -2

#define BIRUIN_ERR_CONFIG -3

#define BIRUIN_ERR_NUMERICAL -4

#define BIRUIN_ERR_UTF8 -5

#define BIRUIN_ERR_PANIC -6

/**
 * Ruin event selector.
 */
typedef enum BiruinRuinType {
  BIRUIN_RUIN_TYPE_MAX = 0,
  BIRUIN_RUIN_TYPE_MIN = 1,
  BIRUIN_RUIN_TYPE_SUM = 2,
  BIRUIN_RUIN_TYPE_AND = 3,
  BIRUIN_RUIN_TYPE_COMP1 = 4,
  BIRUIN_RUIN_TYPE_COMP2 = 5,
} BiruinRuinType;

/**
 * Opaque claim-size distribution handle.
 */
typedef struct BiruinDistribution BiruinDistribution;

/**
 * Opaque model handle: model parameters plus run settings.
 */
typedef struct BiruinModel BiruinModel;

typedef struct BiruinEstimate {
  double p_hat;
  double ci_lo;
  double ci_hi;
  uint64_t n;
  uint64_t hits;
} BiruinEstimate;

typedef struct BiruinEstimateSet {
  struct BiruinEstimate max;
  struct BiruinEstimate min;
  struct BiruinEstimate sum;
  struct BiruinEstimate and_;
  struct BiruinEstimate comp1;
  struct BiruinEstimate comp2;
} BiruinEstimateSet;

typedef struct BiruinAsymptotic {
  double value;
  /**
   * Static NUL-terminated formula label; never freed by the caller.
   */
  const char *case_id;
  /**
   * Nonzero when `value > 1`.
   */
  int32_t warn_gt_one;
} BiruinAsymptotic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * Valid until the next call into this library on the same thread.
 */
const char *biruin_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *biruin_version(void);

/**
 * Creates the built-in default model.
 *
 * # Safety
 * `out` must be valid for writes.
 */
int32_t biruin_model_default(struct BiruinModel **out);

/**
 * Parses a TOML config document into a new model.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be valid for writes.
 */
int32_t biruin_model_from_toml(const char *toml, struct BiruinModel **out);

/**
 * Applies a `key=value` override, e.g. `"model.u1=20"`. The model is left
 * unchanged on error.
 *
 * # Safety
 * `model` must come from this library; `assignment` must be NUL-terminated.
 */
int32_t biruin_model_set(struct BiruinModel *model, const char *assignment);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or come from this library and not be used again.
 */
void biruin_model_free(struct BiruinModel *model);

/**
 * Monte Carlo estimates of all ruin probabilities. `workers = 0` uses the
 * model's configured worker count.
 *
 * # Safety
 * `model` must come from this library; `out` must be valid for writes.
 */
int32_t biruin_estimate_ruin(const struct BiruinModel *model,
                             uint64_t n_paths,
                             uint64_t seed,
                             uint32_t workers,
                             struct BiruinEstimateSet *out);

/**
 * Asymptotic approximation of the `kind` ruin probability at `(u1, u2)`.
 *
 * # Safety
 * `model` must come from this library; `out` must be valid for writes.
 */
int32_t biruin_asymptotic(const struct BiruinModel *model,
                          enum BiruinRuinType kind,
                          double u1,
                          double u2,
                          struct BiruinAsymptotic *out);

/**
 * Creates a claim-size distribution: `pareto [alpha, xm]`,
 * `weibull [shape, scale]`, `lognormal [mu, sigma]` or `exponential [rate]`.
 *
 * # Safety
 * `kind` must be NUL-terminated, `params` valid for `n_params` reads and
 * `out` valid for writes.
 */
int32_t biruin_distribution_new(const char *kind,
                                const double *params,
                                uintptr_t n_params,
                                struct BiruinDistribution **out);

/**
 * Releases a distribution. Null is ignored.
 *
 * # Safety
 * `dist` must be null or come from this library and not be used again.
 */
void biruin_distribution_free(struct BiruinDistribution *dist);

/**
 * Survival function `P(X > x)`.
 *
 * # Safety
 * `dist` must come from this library; `out` must be valid for writes.
 */
int32_t biruin_distribution_tail(const struct BiruinDistribution *dist, double x, double *out);

/**
 * Quantile at level `p` in (0, 1).
 *
 * # Safety
 * `dist` must come from this library; `out` must be valid for writes.
 */
int32_t biruin_distribution_quantile(const struct BiruinDistribution *dist, double p, double *out);

/**
 * `int_u^{u e^{rT}} P(X > y) / y dy`.
 *
 * # Safety
 * `dist` must come from this library; `out` must be valid for writes.
 */
int32_t biruin_tail_integral(const struct BiruinDistribution *dist,
                             double u,
                             double r,
                             double horizon,
                             double *out);

/**
 * Probability that a Brownian bridge from `a` to `b` with variance `v`
 * dips below zero.
 *
 * # Safety
 * `out` must be valid for writes.
 */
int32_t biruin_bridge_crossing_prob(double a, double b, double v, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIRUIN_H */
