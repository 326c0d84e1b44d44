#ifndef FRACLP_H
#define FRACLP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FraclpStatus {
  FRACLP_STATUS_OK = 0,
  FRACLP_STATUS_NULL_POINTER = 1,
  FRACLP_STATUS_INVALID_ARGUMENT = 2,
  FRACLP_STATUS_DIMENSION_MISMATCH = 3,
  FRACLP_STATUS_DOMAIN = 4,
  FRACLP_STATUS_NOT_CONVERGED = 5,
  FRACLP_STATUS_CONFIG = 6,
  FRACLP_STATUS_IO = 7,
  FRACLP_STATUS_NUMERICAL = 8,
  FRACLP_STATUS_PANIC = 9,
} FraclpStatus;

// Reaction term of the heat problem.
typedef enum FraclpReaction {
  FRACLP_REACTION_ZERO = 0,
  // `f(y) = y^3 - y`.
  FRACLP_REACTION_CUBIC = 1,
} FraclpReaction;

typedef struct FraclpGrid FraclpGrid;

typedef struct FraclpOperator FraclpOperator;

typedef struct FraclpProblem FraclpProblem;

typedef struct FraclpResult FraclpResult;

// Mirror of the solver parameters; start from
// [`fraclp_solver_config_default`].
typedef struct FraclpSolverConfig {
  double alpha;
  double beta_reg;
  double p;
  double eps0;
  double eps_decay;
  double eps_min;
  double l_tilde;
  double bt_growth;
  size_t max_outer;
  double tol_step;
  double tol_cg;
  size_t max_bt_trials;
} FraclpSolverConfig;

// One outer iteration, as recorded by the solver.
typedef struct FraclpIterationRecord {
  size_t k;
  double eps_k;
  double l_k;
  size_t bt_trials;
  double phi;
  double phi_next;
  double step_v;
  double descent_penalty;
  double support_fraction;
  double pairing_lower;
  double pairing_upper;
  double pairing_gap;
  double stationarity_residual;
} FraclpIterationRecord;

// Final diagnostics of a run.
typedef struct FraclpReport {
  bool converged;
  size_t iterations;
  double phi_initial;
  double phi_final;
  double support_fraction;
  double residual_norm;
  double residual_scale;
  double pairing_gap;
} FraclpReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *fraclp_last_error(void);

// Library version as a static NUL-terminated string.
const char *fraclp_version(void);

// # Safety
// `out` must be a valid location for a handle pointer.
enum FraclpStatus fraclp_grid_interval(size_t n, double length, struct FraclpGrid **out);

// # Safety
// `out` must be a valid location for a handle pointer.
enum FraclpStatus fraclp_grid_rect(size_t nx,
                                   double lx,
                                   size_t ny,
                                   double ly,
                                   struct FraclpGrid **out);

// Number of nodes, or 0 for a null handle.
//
// # Safety
// `grid` must be null or a live grid handle.
size_t fraclp_grid_len(const struct FraclpGrid *grid);

// Writes node coordinates; `y` may be null for 1-D grids.
//
// # Safety
// `x` (and `y` when non-null) must hold `len` writable values.
enum FraclpStatus fraclp_grid_coords(const struct FraclpGrid *grid,
                                     double *x,
                                     double *y,
                                     size_t len);

// # Safety
// `grid` must be null or a handle not yet freed.
void fraclp_grid_free(struct FraclpGrid *grid);

// # Safety
// `grid` must be a live grid handle and `out` a valid location.
enum FraclpStatus fraclp_operator_spectral(const struct FraclpGrid *grid,
                                           double s,
                                           struct FraclpOperator **out);

// Dense integral (Gagliardo) operator; 1-D grids only.
//
// # Safety
// `grid` must be a live grid handle and `out` a valid location.
enum FraclpStatus fraclp_operator_integral(const struct FraclpGrid *grid,
                                           double s,
                                           struct FraclpOperator **out);

// `out = M^{-1} A u`.
//
// # Safety
// `u` and `out` must hold `len` values.
enum FraclpStatus fraclp_operator_apply(const struct FraclpOperator *op,
                                        const double *u,
                                        double *out,
                                        size_t len);

// `<u, v>_V`.
//
// # Safety
// `u` and `v` must hold `len` values; `out` must be writable.
enum FraclpStatus fraclp_operator_inner(const struct FraclpOperator *op,
                                        const double *u,
                                        const double *v,
                                        size_t len,
                                        double *out);

// Solves `(c A + M diag(w)) u = rhs`; `tol <= 0` selects the default.
//
// # Safety
// `w`, `rhs` and `out` must hold `len` values.
enum FraclpStatus fraclp_operator_solve_shifted(const struct FraclpOperator *op,
                                                double c,
                                                const double *w,
                                                const double *rhs,
                                                double *out,
                                                size_t len,
                                                double tol);

// # Safety
// `op` must be null or a handle not yet freed.
void fraclp_operator_free(struct FraclpOperator *op);

// `F(u) = 1/2 ||K u - z||^2` with `K = I` when `blur_width <= 0`, otherwise
// a Gaussian blur of that width.
//
// # Safety
// `z` must hold `len` values and `out` be a valid location.
enum FraclpStatus fraclp_problem_tracking(const struct FraclpGrid *grid,
                                          const double *z,
                                          size_t len,
                                          double blur_width,
                                          struct FraclpProblem **out);

// Terminal tracking for `y_t - a y_xx + f(y) = 0`, `y(0) = y0 + u`, on a
// 1-D grid with constant diffusivity.
//
// # Safety
// `y0` and `z` must hold `len` values and `out` be a valid location.
enum FraclpStatus fraclp_problem_heat_source(const struct FraclpGrid *grid,
                                             double diffusivity,
                                             enum FraclpReaction reaction,
                                             const double *y0,
                                             const double *z,
                                             size_t len,
                                             double horizon,
                                             size_t steps,
                                             struct FraclpProblem **out);

// # Safety
// `u` must hold `len` values; `out` must be writable.
enum FraclpStatus fraclp_problem_eval(const struct FraclpProblem *prob,
                                      const double *u,
                                      size_t len,
                                      double *out);

// L²-Riesz gradient of `F` at `u`.
//
// # Safety
// `u` and `grad` must hold `len` values.
enum FraclpStatus fraclp_problem_grad(const struct FraclpProblem *prob,
                                      const double *u,
                                      double *grad,
                                      size_t len);

// # Safety
// `prob` must be null or a handle not yet freed.
void fraclp_problem_free(struct FraclpProblem *prob);

struct FraclpSolverConfig fraclp_solver_config_default(void);

// Runs the solver. A null `u0` starts from the minimizer without the `L^p`
// term.
//
// # Safety
// Handles must be live and built on the same grid; `u0` is null or holds
// `len` values; `out` must be a valid location.
enum FraclpStatus fraclp_solve(const struct FraclpSolverConfig *config,
                               const struct FraclpOperator *op,
                               const struct FraclpProblem *prob,
                               const double *u0,
                               size_t len,
                               struct FraclpResult **out);

// # Safety
// `res` must be a live result; `u` must hold `len` values.
enum FraclpStatus fraclp_result_solution(const struct FraclpResult *res, double *u, size_t len);

// Number of iteration records, or 0 for a null handle.
//
// # Safety
// `res` must be null or a live result.
size_t fraclp_result_iterations(const struct FraclpResult *res);

// # Safety
// `res` must be a live result; `out` must be writable.
enum FraclpStatus fraclp_result_record(const struct FraclpResult *res,
                                       size_t k,
                                       struct FraclpIterationRecord *out);

// # Safety
// `res` must be a live result; `out` must be writable.
enum FraclpStatus fraclp_result_report(const struct FraclpResult *res, struct FraclpReport *out);

// Discrete multiplier of the final stationarity report.
//
// # Safety
// `res` must be a live result; `lambda` must hold `len` values.
enum FraclpStatus fraclp_result_multiplier(const struct FraclpResult *res,
                                           double *lambda,
                                           size_t len);

// # Safety
// `res` must be null or a handle not yet freed.
void fraclp_result_free(struct FraclpResult *res);

// Runs an experiment file (single run or sweep). `output_dir` may be null
// to use the directory named in the file.
//
// # Safety
// `config_path` must be a NUL-terminated path; `output_dir` null or one.
enum FraclpStatus fraclp_run_experiment(const char *config_path, const char *output_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACLP_H */
