#ifndef MITTAG_H
#define MITTAG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum MittagStatus {
  MITTAG_STATUS_OK = 0,
  /**
   * Rejected parameters.
   */
  MITTAG_STATUS_INVALID = 1,
  /**
   * A numerical routine failed.
   */
  MITTAG_STATUS_NUMERICAL = 2,
  /**
   * A required pointer was null or a buffer had the wrong length.
   */
  MITTAG_STATUS_NULL_POINTER = 3,
  /**
   * A panic was caught at the boundary.
   */
  MITTAG_STATUS_INTERNAL = 4,
} MittagStatus;

/**
 * Cached evaluator of E_{α,β}(e^{iπs} r^γ) along one ray.
 */
typedef struct MittagEvaluator MittagEvaluator;

/**
 * Radial Fourier transform of the ray kernel in a fixed dimension.
 */
typedef struct MittagKernel MittagKernel;

/**
 * Cauchy problem with Gaussian initial data.
 */
typedef struct MittagProblem MittagProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty when none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *mittag_last_error(void);

/**
 * E_{α,β}(z) by the power series; any α > 0 (including α = 2) is accepted.
 *
 * # Safety
 * `out_re` and `out_im` must be valid for writes.
 */
enum MittagStatus mittag_mlf_series(double alpha,
                                    double beta,
                                    double z_re,
                                    double z_im,
                                    double *out_re,
                                    double *out_im);

/**
 * E_{α,β}(e^{iπs} r^γ), choosing series or contour automatically.
 *
 * # Safety
 * `out_re` and `out_im` must be valid for writes.
 */
enum MittagStatus mittag_mlf_ray(double alpha,
                                 double beta,
                                 double s,
                                 double gamma,
                                 double r,
                                 double *out_re,
                                 double *out_im);

/**
 * Bessel function J_λ(x) for λ ≥ −1/2 and x ≥ 0.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MittagStatus mittag_bessel_j(double lambda, double x, double *out);

/**
 * Admissible L^p range (1, upper) of the kernel transform; `upper` may be +∞
 * and `upper_inclusive` is set to 1 when the endpoint belongs to the range.
 *
 * # Safety
 * All output pointers must be valid for writes.
 */
enum MittagStatus mittag_admissible_exponents(double gamma,
                                              uint32_t d,
                                              double *lower,
                                              double *upper,
                                              int32_t *upper_inclusive);

/**
 * Builds an evaluator for a decay ray.
 *
 * # Safety
 * `out` must be valid for writes; release the handle with [`mittag_evaluator_free`].
 */
enum MittagStatus mittag_evaluator_new(double alpha,
                                       double beta,
                                       double s,
                                       double gamma,
                                       struct MittagEvaluator **out);

/**
 * E_{α,β}(e^{iπs} r^γ) for `n` values of r.
 *
 * # Safety
 * `h` must come from [`mittag_evaluator_new`]; `r`, `out_re` and `out_im`
 * must each point to `n` doubles.
 */
enum MittagStatus mittag_evaluator_eval(const struct MittagEvaluator *h,
                                        const double *r,
                                        size_t n,
                                        double *out_re,
                                        double *out_im);

/**
 * Releases an evaluator; null is ignored.
 *
 * # Safety
 * `h` must come from [`mittag_evaluator_new`] and not be used afterwards.
 */
void mittag_evaluator_free(struct MittagEvaluator *h);

/**
 * Prepares the radial transform of ξ ↦ E_{α,β}(e^{iπs}|ξ|^γ) in dimension d.
 *
 * # Safety
 * `out` must be valid for writes; release with [`mittag_kernel_free`].
 */
enum MittagStatus mittag_kernel_new(double alpha,
                                    double beta,
                                    double s,
                                    double gamma,
                                    uint32_t d,
                                    struct MittagKernel **out);

/**
 * Transform value at |x| = xi > 0.
 *
 * # Safety
 * `h` must come from [`mittag_kernel_new`]; outputs must be valid for writes.
 */
enum MittagStatus mittag_kernel_eval(const struct MittagKernel *h,
                                     double xi,
                                     double *out_re,
                                     double *out_im);

/**
 * Releases a kernel handle; null is ignored.
 *
 * # Safety
 * `h` must come from [`mittag_kernel_new`] and not be used afterwards.
 */
void mittag_kernel_free(struct MittagKernel *h);

/**
 * Problem e^{iπμ}∂_t^α u = e^{iπν}(−Δ)^{β/2}u with u(0) = exp(−|x|²/width²).
 *
 * # Safety
 * `out` must be valid for writes; release with [`mittag_problem_free`].
 */
enum MittagStatus mittag_problem_new(double alpha,
                                     double beta,
                                     double mu,
                                     double nu,
                                     double width,
                                     struct MittagProblem **out);

/**
 * Fourier multiplier E_α(e^{iπ s_eff} t^α |ξ|^β) of the problem.
 *
 * # Safety
 * `h` must come from [`mittag_problem_new`]; outputs must be valid for writes.
 */
enum MittagStatus mittag_problem_multiplier(const struct MittagProblem *h,
                                            double t,
                                            double xi,
                                            double *out_re,
                                            double *out_im);

/**
 * Solution at time t on the periodic box of side `box_length` with `n`
 * points per axis in dimension `d`; writes n^d values row-major.
 *
 * # Safety
 * `h` must come from [`mittag_problem_new`]; `out_re` and `out_im` must each
 * point to `len` doubles.
 */
enum MittagStatus mittag_problem_solve(const struct MittagProblem *h,
                                       uint32_t d,
                                       size_t n,
                                       double box_length,
                                       double t,
                                       double *out_re,
                                       double *out_im,
                                       size_t len);

/**
 * Releases a problem handle; null is ignored.
 *
 * # Safety
 * `h` must come from [`mittag_problem_new`] and not be used afterwards.
 */
void mittag_problem_free(struct MittagProblem *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MITTAG_H */
