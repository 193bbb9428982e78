#ifndef STOCHEXP_H
#define STOCHEXP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SeStatus {
  SE_STATUS_OK = 0,
  SE_STATUS_NULL_POINTER = 1,
  SE_STATUS_INVALID_ARGUMENT = 2,
  SE_STATUS_PARSE = 3,
  SE_STATUS_SINGULAR = 4,
  SE_STATUS_DIVERGENT = 5,
  SE_STATUS_CAPACITY = 6,
  SE_STATUS_TOO_FEW_SAMPLES = 7,
  SE_STATUS_NUMERICAL = 8,
  SE_STATUS_PANIC = 9,
} SeStatus;

typedef enum SeScheme {
  SE_SCHEME_EXACT = 0,
  SE_SCHEME_EM = 1,
} SeScheme;

/**
 * Opaque set of simulated paths.
 */
typedef struct SeBundle SeBundle;

/**
 * Opaque integrand ψ.
 */
typedef struct SeIntegrand SeIntegrand;

/**
 * Flat copy of an estimate. `target` is NaN and `pass` is -1 when the
 * quantity has no closed-form target.
 */
typedef struct SeEstimate {
  double estimate;
  double std_error;
  double ci_low;
  double ci_high;
  double target;
  double oracle_std_error;
  uint64_t n;
  int32_t pass;
} SeEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *se_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *se_version(void);

/**
 * Parses an integrand from its JSON form, e.g.
 * `{"kind": "constant", "params": [1]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_handle` a valid pointer.
 */
enum SeStatus se_integrand_from_json(const char *json, struct SeIntegrand **out_handle);

/**
 * Constant integrand ψ ≡ c.
 *
 * # Safety
 * `out_handle` must be a valid pointer.
 */
enum SeStatus se_integrand_constant(double c, struct SeIntegrand **out_handle);

/**
 * # Safety
 * `handle` must be null or come from an `se_integrand_*` constructor and
 * not have been freed.
 */
void se_integrand_free(struct SeIntegrand *handle);

/**
 * # Safety
 * Pointers must be valid.
 */
enum SeStatus se_eval_psi(const struct SeIntegrand *handle, double t, double *value);

/**
 * `φ(t) = ∫₀ᵗ ψ² du` with the default method and tolerance.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SeStatus se_phi(const struct SeIntegrand *handle, double t, double *value);

/**
 * Novikov check on `[0, t]`. Sets `*divergent` to 0 or 1; `*half_phi`
 * receives ½φ(t) when finite and +inf otherwise.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SeStatus se_novikov_check(const struct SeIntegrand *handle,
                               double t,
                               int32_t *divergent,
                               double *half_phi);

/**
 * Simulates `n_paths` paths of Z on the grid `times[0..n_times]`
 * (starting at 0, strictly increasing).
 *
 * # Safety
 * `times` must point to `n_times` doubles; other pointers must be valid.
 */
enum SeStatus se_bundle_simulate(const struct SeIntegrand *handle,
                                 const double *times,
                                 size_t n_times,
                                 size_t n_paths,
                                 uint64_t seed,
                                 uint64_t stream,
                                 enum SeScheme scheme,
                                 bool antithetic,
                                 struct SeBundle **out_bundle);

/**
 * # Safety
 * `bundle` must be null or come from [`se_bundle_simulate`] and not have
 * been freed.
 */
void se_bundle_free(struct SeBundle *bundle);

/**
 * Number of paths, or 0 for a null handle.
 *
 * # Safety
 * `bundle` must be null or valid.
 */
size_t se_bundle_n_paths(const struct SeBundle *bundle);

/**
 * Number of grid nodes, or 0 for a null handle.
 *
 * # Safety
 * `bundle` must be null or valid.
 */
size_t se_bundle_n_nodes(const struct SeBundle *bundle);

/**
 * Copies Z row-major (`n_paths × n_nodes`) into `buf`, which must hold
 * exactly that many doubles.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum SeStatus se_bundle_copy_z(const struct SeBundle *bundle, double *buf, size_t len);

/**
 * Copies the discrete compensator `φ_N(t_j)` (one value per node).
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum SeStatus se_bundle_copy_compensator(const struct SeBundle *bundle, double *buf, size_t len);

/**
 * Estimate of `E|Z(t_j)|^p` at node `t_index` with its closed-form target.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SeStatus se_estimate_p_moment(const struct SeBundle *bundle,
                                   size_t t_index,
                                   double p,
                                   struct SeEstimate *result);

/**
 * Binned conditional test of `E[Z(t) | Z(s)] = Z(s)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SeStatus se_martingale_test(const struct SeBundle *bundle,
                                 size_t s_index,
                                 size_t t_index,
                                 size_t n_bins,
                                 double *max_abs_gap_in_se,
                                 int32_t *pass);

/**
 * m-th moment of a centred Gaussian with the given variance.
 *
 * # Safety
 * `value` must be valid.
 */
enum SeStatus se_gaussian_moment(double variance, size_t m, double *value);

/**
 * Number of perfect matchings of m points.
 *
 * # Safety
 * `count` must be valid.
 */
enum SeStatus se_pairing_count(size_t m, uint64_t *count);

/**
 * Truncated moment generating series at β = 1 up to even order `order`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SeStatus se_mgf_truncated(const struct SeIntegrand *handle,
                               double t,
                               size_t order,
                               double *total);

/**
 * Truncated cumulant series. `terms` receives one value per order
 * `1..=order`, so it must hold `order` doubles.
 *
 * # Safety
 * `terms` must point to `n_terms` writable doubles; other pointers must be
 * valid.
 */
enum SeStatus se_cgf_truncated(const struct SeIntegrand *handle,
                               double t,
                               size_t order,
                               double *terms,
                               size_t n_terms,
                               double *total);

/**
 * Compares `ln(MGF_M)` with `CGF_M` against the truncation bound.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SeStatus se_log_relation(const struct SeIntegrand *handle,
                              double t,
                              size_t order,
                              double *gap,
                              double *bound,
                              int32_t *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STOCHEXP_H */
