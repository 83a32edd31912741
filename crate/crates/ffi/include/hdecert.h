#ifndef HDECERT_H
#define HDECERT_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HdecertStatus {
  HDECERT_STATUS_OK = 0,
  HDECERT_STATUS_NULL_POINTER = 1,
  HDECERT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The adversary set contains states that always pass.
   */
  HDECERT_STATUS_INFEASIBLE = 3,
  HDECERT_STATUS_NUMERICAL = 4,
  HDECERT_STATUS_PANIC = 5,
} HdecertStatus;

/**
 * Strategy selector for [`hdecert_plan`].
 */
typedef enum HdecertStrategy {
  HDECERT_STRATEGY_OPT = 0,
  HDECERT_STRATEGY_MUB = 1,
  HDECERT_STRATEGY_SEP_H = 2,
  HDECERT_STRATEGY_LC_H = 3,
} HdecertStrategy;

/**
 * Opaque Hermitian operator.
 */
typedef struct HdecertOperator HdecertOperator;

/**
 * Opaque Schmidt spectrum.
 */
typedef struct HdecertSpectrum HdecertSpectrum;

/**
 * Separation probability bounds for one spectrum.
 */
typedef struct HdecertBounds {
  double psep_lb;
  double psep_h;
  double plc_ub;
} HdecertBounds;

typedef struct HdecertPlan {
  double separation_probability;
  uint64_t tests_required;
} HdecertPlan;

typedef struct HdecertSpectralGap {
  double beta;
  double nu;
} HdecertSpectralGap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (nul-terminated,
 * truncated to `len`). Returns the buffer size needed for the full message,
 * or zero if there is no error recorded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t hdecert_last_error(char *buf, size_t len);

/**
 * Library version as a static nul-terminated string.
 */
const char *hdecert_version(void);

/**
 * Creates a spectrum from `len` coefficients summing to one.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum HdecertStatus hdecert_spectrum_new(const double *values,
                                        size_t len,
                                        struct HdecertSpectrum **out);

/**
 * Uniform spectrum of the maximally entangled state in dimension `d`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdecertStatus hdecert_spectrum_uniform(size_t d, struct HdecertSpectrum **out);

/**
 * # Safety
 * `s` must be null or a handle from this library not yet freed.
 */
void hdecert_spectrum_free(struct HdecertSpectrum *s);

/**
 * Local dimension of the spectrum, or zero for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t hdecert_spectrum_dim(const struct HdecertSpectrum *s);

/**
 * Copies the sorted coefficients into `values` (at most `len` entries).
 * Returns the dimension.
 *
 * # Safety
 * `s` must be a live handle; `values` must be null or hold `len` doubles.
 */
size_t hdecert_spectrum_values(const struct HdecertSpectrum *s, double *values, size_t len);

/**
 * Tail weight `E_r`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HdecertStatus hdecert_e_r(const struct HdecertSpectrum *s, size_t r, double *out);

/**
 * Largest fidelity with states whose `E_r` is at most `e`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HdecertStatus hdecert_fidelity_limited(const struct HdecertSpectrum *s,
                                            size_t r,
                                            double e,
                                            double *out);

/**
 * Bounds against states of Schmidt number at most `r`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HdecertStatus hdecert_bounds_rank(const struct HdecertSpectrum *s,
                                       size_t r,
                                       struct HdecertBounds *out);

/**
 * Bounds against states with `E_r ≤ e`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HdecertStatus hdecert_bounds_limited(const struct HdecertSpectrum *s,
                                          size_t r,
                                          double e,
                                          struct HdecertBounds *out);

/**
 * `(r+1)/(d+1)` for the maximally entangled state.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdecertStatus hdecert_sep_prob_mes_rank(size_t d, size_t r, double *out);

/**
 * Smallest `N` with `p^N ≤ delta`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdecertStatus hdecert_tests_required(double p, double delta, uint64_t *out);

/**
 * Test budget for `strategy` against `E_r ≤ e` (pass `e = 0` for Schmidt
 * number at most `r`).
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HdecertStatus hdecert_plan(const struct HdecertSpectrum *s,
                                size_t r,
                                double e,
                                double delta,
                                enum HdecertStrategy strategy,
                                struct HdecertPlan *out);

/**
 * 2-design operator for the maximally entangled state in dimension `d`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdecertStatus hdecert_operator_opt(size_t d, struct HdecertOperator **out);

/**
 * Optimal separable homogeneous operator.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HdecertStatus hdecert_operator_sep_h(const struct HdecertSpectrum *s,
                                          struct HdecertOperator **out);

/**
 * Local homogeneous operator.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HdecertStatus hdecert_operator_lc_h(const struct HdecertSpectrum *s,
                                         struct HdecertOperator **out);

/**
 * Averaged operator of the two-test Fourier strategy.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum HdecertStatus hdecert_operator_mub(const struct HdecertSpectrum *s,
                                        struct HdecertOperator **out);

/**
 * Two-qubit family member `Ω(θ, p)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdecertStatus hdecert_operator_two_qubit(double theta, double p, struct HdecertOperator **out);

/**
 * # Safety
 * `op` must be null or a handle from this library not yet freed.
 */
void hdecert_operator_free(struct HdecertOperator *op);

/**
 * Matrix dimension, or zero for a null handle.
 *
 * # Safety
 * `op` must be null or a live handle.
 */
size_t hdecert_operator_dim(const struct HdecertOperator *op);

/**
 * Copies the entries in row-major order into `re` and `im`, each holding
 * `len ≥ dim²` doubles.
 *
 * # Safety
 * `op` must be a live handle; `re` and `im` must hold `len` doubles.
 */
enum HdecertStatus hdecert_operator_entries(const struct HdecertOperator *op,
                                            double *re,
                                            double *im,
                                            size_t len);

/**
 * Spectral gap of `op` relative to the target state with spectrum `s`
 * (local dimension `dim(s)` on both sides).
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum HdecertStatus hdecert_operator_spectral_gap(const struct HdecertOperator *op,
                                                 const struct HdecertSpectrum *s,
                                                 struct HdecertSpectralGap *out);

/**
 * Separation probability of the optimal two-qubit strategy for
 * `cos θ |00⟩ + sin θ |11⟩`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdecertStatus hdecert_two_qubit_sep_prob(double theta, double *out);

/**
 * Angle where the optimal two-qubit strategy changes branch.
 */
double hdecert_theta_star(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HDECERT_H */
