/* C interface for the rlp interval toolkit. */

#ifndef RLP_H
#define RLP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call. Zero is success; anything else is an error whose
// detail is available from `rlp_last_error_message`.
typedef enum RlpStatus {
  RLP_STATUS_OK = 0,
  // A required pointer argument was null.
  RLP_STATUS_NULL_POINTER = 1,
  // An argument or the data shape was rejected.
  RLP_STATUS_INVALID_ARGUMENT = 2,
  // A numerical routine failed to converge or lost definiteness.
  RLP_STATUS_NUMERICAL_ERROR = 3,
  // A solution was produced but failed its optimality check.
  RLP_STATUS_CERTIFICATION_ERROR = 4,
  // Too many stochastic replications failed.
  RLP_STATUS_SIMULATION_ERROR = 5,
  // Reading or writing external data failed.
  RLP_STATUS_IO_ERROR = 6,
  // A panic was caught at the language boundary.
  RLP_STATUS_INTERNAL_PANIC = 7,
} RlpStatus;

// Design matrix plus response, owned by the library.
typedef struct RlpDataset RlpDataset;

// Result of interval construction, owned by the library.
typedef struct RlpIntervals RlpIntervals;

// Options for interval construction. Start from `rlp_ci_options_default`
// and override fields as needed.
typedef struct RlpCiOptions {
  // Central coverage level, strictly between 0 and 1.
  double level;
  // Penalty to fit at. Any negative value selects the penalty by
  // cross-validation instead.
  double lambda;
  // Noise variance. Any nonpositive value estimates it from the residuals
  // of the fitted model.
  double sigma2;
  // Folds used when the penalty is cross-validated.
  size_t cv_folds;
  // Seed for the deterministic stream behind fold assignment.
  uint64_t seed;
  // Report on the standardized scale instead of raw predictor units.
  bool standardized;
} RlpCiOptions;

// One confidence interval, copied out by value.
typedef struct RlpInterval {
  // Zero-based column of the design matrix.
  size_t variable;
  // Penalized point estimate at the fitted penalty.
  double lasso_estimate;
  // Relaxed estimate the interval is centered around.
  double beta_tilde;
  double lower;
  double upper;
  // Effective sample size after projecting off the other selected columns.
  double n_tilde;
  // Whether the penalized fit kept this variable.
  bool selected;
  // No usable information for this coordinate; endpoints are infinite.
  bool degenerate;
} RlpInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library as a static NUL-terminated string.
const char *rlp_version(void);

// Message describing the most recent failure on the calling thread, or null
// if the last call succeeded. The pointer stays valid until the next
// library call on the same thread.
const char *rlp_last_error_message(void);

// Create a dataset from caller-owned buffers; the contents are copied.
//
// `x` is row-major with `n` rows and `p` columns; `y` has length `n`.
//
// # Safety
//
// `x` must point to at least `n * p` readable doubles, `y` to at least `n`,
// and `out` must be a valid location to store the handle. On success the
// handle must be released with [`rlp_dataset_free`].
enum RlpStatus rlp_dataset_new(size_t n,
                               size_t p,
                               const double *x,
                               const double *y,
                               struct RlpDataset **out);

// Number of observations in the dataset, or 0 for a null handle.
size_t rlp_dataset_rows(const struct RlpDataset *dataset);

// Number of predictors in the dataset, or 0 for a null handle.
size_t rlp_dataset_cols(const struct RlpDataset *dataset);

// Release a dataset handle. Null is ignored.
//
// # Safety
//
// `dataset` must be a handle from [`rlp_dataset_new`] that has not been
// freed already.
void rlp_dataset_free(struct RlpDataset *dataset);

// Defaults: level 0.8, cross-validated penalty, estimated noise variance,
// 10 folds, seed 0, raw scale.
struct RlpCiOptions rlp_ci_options_default(void);

// Build confidence intervals for every coefficient of `dataset`.
//
// # Safety
//
// `dataset` must be a live handle from [`rlp_dataset_new`], `options` must
// point to a valid options struct, and `out` must be a valid location to
// store the handle. On success the handle must be released with
// [`rlp_intervals_free`].
enum RlpStatus rlp_ci(const struct RlpDataset *dataset,
                      const struct RlpCiOptions *options,
                      struct RlpIntervals **out);

// Fit penalized coefficients and copy them into a caller buffer.
//
// A negative `lambda` selects the penalty by cross-validation with
// `cv_folds` folds and the given `seed`. With `standardized` false the
// coefficients are on the raw predictor scale and `intercept` (when
// non-null) receives the fitted intercept; on the standardized scale the
// intercept is zero by construction. `lambda_used` (when non-null) receives
// the penalty that was actually fit.
//
// # Safety
//
// `dataset` must be a live handle, `coefficients` must point to at least
// `coefficients_len` writable doubles with `coefficients_len >= p`, and
// `intercept` / `lambda_used` must each be null or valid for one write.
enum RlpStatus rlp_fit(const struct RlpDataset *dataset,
                       double lambda,
                       size_t cv_folds,
                       uint64_t seed,
                       bool standardized,
                       double *coefficients,
                       size_t coefficients_len,
                       double *intercept,
                       double *lambda_used);

// Number of intervals in the set, or 0 for a null handle.
size_t rlp_intervals_len(const struct RlpIntervals *intervals);

// Coverage level the set was built for, or NaN for a null handle.
double rlp_intervals_level(const struct RlpIntervals *intervals);

// Penalty the underlying model was fit at, or NaN for a null handle.
double rlp_intervals_lambda(const struct RlpIntervals *intervals);

// Noise variance the intervals were built with, or NaN for a null handle.
double rlp_intervals_sigma2(const struct RlpIntervals *intervals);

// Number of selected columns dropped from the projection for collinearity,
// or 0 for a null handle.
size_t rlp_intervals_dropped_len(const struct RlpIntervals *intervals);

// Copy one interval out by value.
//
// # Safety
//
// `intervals` must be a live handle and `out` valid for one write.
enum RlpStatus rlp_intervals_get(const struct RlpIntervals *intervals,
                                 size_t index,
                                 struct RlpInterval *out);

// Copy all lower and upper endpoints into caller buffers. Either buffer may
// be null to skip that side.
//
// # Safety
//
// `intervals` must be a live handle; each non-null buffer must hold at
// least `len` writable doubles with `len >= rlp_intervals_len(intervals)`.
enum RlpStatus rlp_intervals_bounds(const struct RlpIntervals *intervals,
                                    double *lower,
                                    double *upper,
                                    size_t len);

// Release an interval-set handle. Null is ignored.
//
// # Safety
//
// `intervals` must be a handle from [`rlp_ci`] that has not been freed
// already.
void rlp_intervals_free(struct RlpIntervals *intervals);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RLP_H */
