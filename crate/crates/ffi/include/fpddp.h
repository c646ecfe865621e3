#ifndef FPDDP_H
#define FPDDP_H

/* Generated by cbindgen from the fpddp-ffi sources; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Solver selector for [`fpddp_solve`].
 */
#define FPDDP_SOLVER_FPDDP 0

#define FPDDP_SOLVER_DSS 1

#define FPDDP_SOLVER_DMS 2

typedef enum FpddpErrorCode {
  FPDDP_ERROR_CODE_OK = 0,
  FPDDP_ERROR_CODE_NULL_POINTER = 1,
  FPDDP_ERROR_CODE_INVALID_ARGUMENT = 2,
  FPDDP_ERROR_CODE_UNKNOWN_PROBLEM = 3,
  FPDDP_ERROR_CODE_UNKNOWN_SOLVER = 4,
  FPDDP_ERROR_CODE_SOLVER_ERROR = 5,
  FPDDP_ERROR_CODE_BUFFER_TOO_SMALL = 6,
  FPDDP_ERROR_CODE_PANIC = 7,
} FpddpErrorCode;

typedef enum FpddpStatus {
  FPDDP_STATUS_FEASIBLE = 0,
  FPDDP_STATUS_STATIONARY = 1,
  FPDDP_STATUS_MAX_ITER = 2,
  FPDDP_STATUS_REG_FAILURE = 3,
} FpddpStatus;

/**
 * Opaque problem handle.
 */
typedef struct FpddpProblem FpddpProblem;

/**
 * Opaque result handle.
 */
typedef struct FpddpResult FpddpResult;

typedef struct FpddpSettings {
  double armijo;
  double min_step;
  double feasibility_tol;
  double stationarity_tol;
  double mu_min;
  double mu_init;
  double mu_factor;
  uint32_t max_iter;
  uint32_t max_reg_restarts;
} FpddpSettings;

/**
 * Summary numbers of a solve.
 */
typedef struct FpddpSummary {
  enum FpddpStatus status;
  uint32_t iterations;
  uint32_t hessian_evals;
  double objective;
  double kkt;
  double defect;
} FpddpSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fpddp_last_error_message(void);

struct FpddpSettings fpddp_settings_default(void);

/**
 * Creates a registered problem with its default initial guess.
 * `obstacle` is the cart pendulum obstacle position; pass NaN for the
 * default or for problems without one.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FpddpErrorCode fpddp_problem_new(const char *name, double obstacle, struct FpddpProblem **out);

/**
 * # Safety
 * `problem` must come from [`fpddp_problem_new`] and not be freed twice.
 */
void fpddp_problem_free(struct FpddpProblem *problem);

/**
 * # Safety
 * `problem` must be a live handle; output pointers must be valid.
 */
enum FpddpErrorCode fpddp_problem_dims(const struct FpddpProblem *problem,
                                       size_t *state_dim,
                                       size_t *control_dim,
                                       size_t *horizon);

/**
 * Solves from the problem's default initial guess.
 *
 * `solver` is one of the `FPDDP_SOLVER_*` values; `sigma` is the penalty
 * weight and only read for `FPDDP_SOLVER_DMS`. A null `settings` uses the
 * defaults.
 *
 * # Safety
 * `problem` must be a live handle, `settings` null or valid, `out` valid.
 */
enum FpddpErrorCode fpddp_solve(const struct FpddpProblem *problem,
                                int32_t solver,
                                double sigma,
                                const struct FpddpSettings *settings,
                                struct FpddpResult **out);

/**
 * # Safety
 * `result` must come from [`fpddp_solve`] and not be freed twice.
 */
void fpddp_result_free(struct FpddpResult *result);

/**
 * # Safety
 * `result` must be a live handle and `out` valid.
 */
enum FpddpErrorCode fpddp_result_summary(const struct FpddpResult *result,
                                         struct FpddpSummary *out);

/**
 * Copies the `(horizon + 1) × state_dim` states, row by row, into `buffer`.
 *
 * # Safety
 * `result` must be a live handle and `buffer` valid for `len` writes.
 */
enum FpddpErrorCode fpddp_result_states(const struct FpddpResult *result,
                                        double *buffer,
                                        size_t len);

/**
 * Copies the `horizon × control_dim` controls, row by row, into `buffer`.
 *
 * # Safety
 * `result` must be a live handle and `buffer` valid for `len` writes.
 */
enum FpddpErrorCode fpddp_result_controls(const struct FpddpResult *result,
                                          double *buffer,
                                          size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPDDP_H */
