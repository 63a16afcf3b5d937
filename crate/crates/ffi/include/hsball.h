#ifndef HSBALL_H
#define HSBALL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum HsbStatus {
  HSB_STATUS_OK = 0,
  HSB_STATUS_INVALID_PARAMS = 1,
  HSB_STATUS_POINT_OUTSIDE_BALL = 2,
  HSB_STATUS_LOG_KERNEL_CASE = 3,
  HSB_STATUS_DEGREE_OVERFLOW = 4,
  HSB_STATUS_SINGULAR_GRAM = 5,
  HSB_STATUS_BISECTION_NO_CONVERGE = 6,
  HSB_STATUS_QUADRATURE_UNDER_RESOLVED = 7,
  HSB_STATUS_NULL_POINTER = 8,
  HSB_STATUS_INVALID_STRING = 9,
  HSB_STATUS_BUFFER_TOO_SMALL = 10,
  HSB_STATUS_PANIC = 11,
} HsbStatus;

/**
 * Drury dual system of a sequence.
 */
typedef struct HsbDrury HsbDrury;

/**
 * Validated `(n, s, p)`.
 */
typedef struct HsbParams HsbParams;

/**
 * Finite sequence of distinct points of the ball.
 */
typedef struct HsbPointSeq HsbPointSeq;

/**
 * Truncated power series.
 */
typedef struct HsbPoly HsbPoly;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hsb_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *hsb_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed; NULL is ignored.
 */
void hsb_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer to write a handle into.
 */
enum HsbStatus hsb_params_new(uintptr_t n,
                              double s,
                              double p,
                              bool override_sp_bound,
                              struct HsbParams **out);

/**
 * # Safety
 * `params` must come from [`hsb_params_new`]; NULL is ignored.
 */
void hsb_params_free(struct HsbParams *params);

/**
 * Dual exponent (`inf` at `p = 1`) and kernel exponent `n - 2s`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HsbStatus hsb_params_derived(const struct HsbParams *params,
                                  double *out_p_prime,
                                  double *out_rho);

/**
 * `(1-|a|^2)^{s - n/q'}` at a point given as `2n` doubles.
 *
 * # Safety
 * `point` must hold `2n` doubles.
 */
enum HsbStatus hsb_kernel_norm_proxy(const struct HsbParams *params,
                                     const double *point,
                                     double q,
                                     double *out);

/**
 * Sequence of `count` points, each `2n` doubles, stored contiguously.
 *
 * # Safety
 * `coords` must hold `count * 2n` doubles; `out` must be valid.
 */
enum HsbStatus hsb_pointseq_new(const struct HsbParams *params,
                                const double *coords,
                                uintptr_t count,
                                struct HsbPointSeq **out);

/**
 * # Safety
 * `seq` must come from [`hsb_pointseq_new`]; NULL is ignored.
 */
void hsb_pointseq_free(struct HsbPointSeq *seq);

/**
 * # Safety
 * `seq` must be valid or NULL (which gives 0).
 */
uintptr_t hsb_pointseq_len(const struct HsbPointSeq *seq);

/**
 * Series from its JSON form `{"n", "cap", "terms": [{"alpha", "re", "im"}]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid.
 */
enum HsbStatus hsb_poly_from_json(const char *json, struct HsbPoly **out);

/**
 * # Safety
 * `poly` must be valid; the string written to `out` is freed with [`hsb_string_free`].
 */
enum HsbStatus hsb_poly_to_json(const struct HsbPoly *poly, char **out);

/**
 * # Safety
 * `poly` must come from this library; NULL is ignored.
 */
void hsb_poly_free(struct HsbPoly *poly);

/**
 * Value at `z` (`2n` doubles).
 *
 * # Safety
 * Pointers must be valid and `z` must hold `2n` doubles.
 */
enum HsbStatus hsb_poly_eval(const struct HsbPoly *poly,
                             const double *z,
                             double *out_re,
                             double *out_im);

/**
 * Truncated product; the cap is the larger of the two caps.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HsbStatus hsb_poly_mul(const struct HsbPoly *a, const struct HsbPoly *b, struct HsbPoly **out);

/**
 * `R^j f`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HsbStatus hsb_poly_radial_derivative(const struct HsbPoly *poly,
                                          uint32_t j,
                                          struct HsbPoly **out);

/**
 * Gram matrix into `buf` as `N x N` row-major `(re, im)` pairs, so
 * `buf_len >= 2 N^2`. `convention` is 0 for the model kernel, 1 for the exact one.
 *
 * # Safety
 * `buf` must hold `buf_len` doubles.
 */
enum HsbStatus hsb_gram(const struct HsbPointSeq *seq,
                        uint32_t convention,
                        uint32_t cap,
                        double *buf,
                        uintptr_t buf_len);

/**
 * Smallest Pick multiplier norm for `values` (`2N` doubles).
 *
 * # Safety
 * `values` must hold `2N` doubles.
 */
enum HsbStatus hsb_pick_min_norm(const struct HsbPointSeq *seq,
                                 const double *values,
                                 double *out_t);

/**
 * # Safety
 * `seq` and `out` must be valid.
 */
enum HsbStatus hsb_drury_build(const struct HsbPointSeq *seq, uint32_t cap, struct HsbDrury **out);

/**
 * # Safety
 * `sys` must come from [`hsb_drury_build`]; NULL is ignored.
 */
void hsb_drury_free(struct HsbDrury *sys);

/**
 * Identity residuals at `samples` seeded points, as JSON.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HsbStatus hsb_drury_summary_json(struct HsbDrury *sys,
                                      uintptr_t samples,
                                      uint64_t seed,
                                      char **out);

/**
 * `max sum_a |gamma_a(z)|^{2l}` against `C^{2l}` over seeded points.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HsbStatus hsb_drury_ha0(const struct HsbDrury *sys,
                             uint32_t l,
                             uintptr_t samples,
                             uint64_t seed,
                             double *out_max_sum,
                             double *out_bound,
                             bool *out_pass);

/**
 * Exclusion coefficients `A_q(j, l)` as numerator/denominator pairs.
 * `capacity` is the length of both output arrays; `out_len` receives
 * `min(j, l) + 1`.
 *
 * # Safety
 * `out_num` and `out_den` must hold `capacity` integers.
 */
enum HsbStatus hsb_appendix_exclusion(uint32_t j,
                                      uint32_t l,
                                      int64_t *out_num,
                                      int64_t *out_den,
                                      uintptr_t capacity,
                                      uintptr_t *out_len);

/**
 * Run a CLI command (e.g. `"drury"`) on a JSON configuration and return the
 * JSON report. `Ok` means the command ran; the report's `passed` field says
 * whether its checks held.
 *
 * # Safety
 * Strings must be NUL-terminated; `out` must be valid.
 */
enum HsbStatus hsb_run(const char *command, const char *config_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HSBALL_H */
