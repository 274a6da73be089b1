#ifndef TSRK_H
#define TSRK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TsrkStatus {
  TSRK_STATUS_OK = 0,
  TSRK_STATUS_NULL_POINTER = 1,
  TSRK_STATUS_INVALID_ARGUMENT = 2,
  TSRK_STATUS_DIMENSION_MISMATCH = 3,
  TSRK_STATUS_NON_FINITE = 4,
  TSRK_STATUS_ZERO_ROW = 5,
  TSRK_STATUS_RANK_DEFICIENT = 6,
  TSRK_STATUS_DEGENERATE_PAIR = 7,
  TSRK_STATUS_NO_USABLE_PAIR = 8,
  TSRK_STATUS_INDEX_OUT_OF_RANGE = 9,
  TSRK_STATUS_PANIC = 10,
} TsrkStatus;

typedef enum TsrkMethod {
  TSRK_METHOD_CYCLIC = 0,
  TSRK_METHOD_RANDOMIZED = 1,
  TSRK_METHOD_TWO_SUBSPACE = 2,
} TsrkMethod;

// Standardized system (unit-norm rows, scaled right-hand side).
typedef struct TsrkSystem TsrkSystem;

// Result of a solve: per-iteration records and the final iterate.
typedef struct TsrkTrace TsrkTrace;

typedef struct TsrkCoherence {
  double delta;
  double big_delta;
} TsrkCoherence;

typedef struct TsrkCondition {
  double frob_sq;
  double sigma_min;
  double sigma_max;
  double scaled_condition;
} TsrkCondition;

// `q` and `eta_improved` are NaN when the row-difference matrix is rank
// deficient.
typedef struct TsrkRateFactors {
  double delta;
  double big_delta;
  double r;
  double d;
  double e;
  double q;
  double eta;
  double eta_improved;
} TsrkRateFactors;

typedef struct TsrkSolveOptions {
  enum TsrkMethod method;
  size_t max_iterations;
  uint64_t seed;
  // Non-zero enables the sign-adjusted two-subspace step.
  int32_t sign_adjust;
  // Negative disables the residual stopping rule.
  double residual_threshold;
  // Optional starting iterate of length n (NULL for zeros).
  const double *x0;
  // Optional known solution of length n (NULL to skip error tracking).
  const double *x_true;
} TsrkSolveOptions;

// One trace entry. `error` is NaN when no solution was supplied.
typedef struct TsrkTraceRecord {
  size_t k;
  size_t row_touches;
  double error;
  double residual;
} TsrkTraceRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *tsrk_version(void);

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *tsrk_last_error_message(void);

// Standardizes the `m x n` row-major matrix `a` with right-hand side `b`
// (length `m`) and stores a new handle in `*out`.
//
// # Safety
// `a` must point to `m * n` doubles, `b` to `m` doubles, `out` to writable
// storage for one pointer.
enum TsrkStatus tsrk_system_new(const double *a,
                                size_t m,
                                size_t n,
                                const double *b,
                                struct TsrkSystem **out);

// Releases a system. NULL is ignored.
//
// # Safety
// `sys` must come from [`tsrk_system_new`] and not be used afterwards.
void tsrk_system_free(struct TsrkSystem *sys);

// # Safety
// `sys` must be a live handle; `m` and `n` writable or NULL.
enum TsrkStatus tsrk_system_dims(const struct TsrkSystem *sys, size_t *m, size_t *n);

// # Safety
// `sys` must be a live handle and `out` writable.
enum TsrkStatus tsrk_coherence(const struct TsrkSystem *sys, struct TsrkCoherence *out);

// # Safety
// `sys` must be a live handle and `out` writable.
enum TsrkStatus tsrk_condition(const struct TsrkSystem *sys, struct TsrkCondition *out);

// # Safety
// `sys` must be a live handle and `out` writable.
enum TsrkStatus tsrk_rate_factors(const struct TsrkSystem *sys, struct TsrkRateFactors *out);

// Coherence gain `D` for `0 <= delta <= big_delta <= 1`.
//
// # Safety
// `out` must be writable.
enum TsrkStatus tsrk_d_factor(double delta, double big_delta, double *out);

// Runs a solver and stores the trace handle in `*out`.
//
// # Safety
// `sys` must be a live handle, `opts` readable, `out` writable. Non-NULL
// `opts->x0` and `opts->x_true` must point to `n` doubles.
enum TsrkStatus tsrk_solve(const struct TsrkSystem *sys,
                           const struct TsrkSolveOptions *opts,
                           struct TsrkTrace **out);

// Number of records (iterations + 1); 0 for NULL.
//
// # Safety
// `trace` must be a live handle or NULL.
size_t tsrk_trace_len(const struct TsrkTrace *trace);

// # Safety
// `trace` must be a live handle and `out` writable.
enum TsrkStatus tsrk_trace_record(const struct TsrkTrace *trace,
                                  size_t index,
                                  struct TsrkTraceRecord *out);

// Copies the final iterate into `x`, which must hold `len == n` doubles.
//
// # Safety
// `trace` must be a live handle and `x` writable for `len` doubles.
enum TsrkStatus tsrk_trace_solution(const struct TsrkTrace *trace, double *x, size_t len);

// Releases a trace. NULL is ignored.
//
// # Safety
// `trace` must come from [`tsrk_solve`] and not be used afterwards.
void tsrk_trace_free(struct TsrkTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TSRK_H */
