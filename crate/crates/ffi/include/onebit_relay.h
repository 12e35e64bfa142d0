#ifndef ONEBIT_RELAY_H
#define ONEBIT_RELAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `Ok` is zero.
 */
typedef enum OnebitStatus {
  ONEBIT_STATUS_OK = 0,
  ONEBIT_STATUS_NULL_POINTER = 1,
  ONEBIT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Output buffer length differs from the number of user pairs.
   */
  ONEBIT_STATUS_BUFFER_SIZE = 3,
  ONEBIT_STATUS_NUMERICAL = 4,
  ONEBIT_STATUS_INFEASIBLE = 5,
  ONEBIT_STATUS_IO = 6,
  ONEBIT_STATUS_PANIC = 7,
} OnebitStatus;

/**
 * Opaque scenario handle.
 */
typedef struct OnebitConfig OnebitConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful call. Valid until the next call into this library.
 */
const char *onebit_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *onebit_version(void);

/**
 * Symmetric scenario: unit large-scale fading, identity pilots,
 * `tau_c = 200`, `tau_p = K`. Returns NULL on invalid input.
 */
struct OnebitConfig *onebit_config_new(size_t m, size_t k, double p_s, double p_r, double p_p);

/**
 * Parses a scenario in `key = value` form over the defaults.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a writable pointer.
 */
enum OnebitStatus onebit_config_parse(const char *text, struct OnebitConfig **out);

/**
 * # Safety
 * `cfg` must be NULL or a handle from this library not yet freed.
 */
void onebit_config_free(struct OnebitConfig *cfg);

/**
 * Applies one `key=value` setting, e.g. `"p_S=5dB"` or `"pilot_kind=hadamard"`.
 * The handle is unchanged on failure.
 *
 * # Safety
 * `cfg` must be a live handle and `assignment` a NUL-terminated string.
 */
enum OnebitStatus onebit_config_set(struct OnebitConfig *cfg, const char *assignment);

/**
 * Sets per-user source powers; `len` must equal K.
 *
 * # Safety
 * `cfg` must be a live handle and `p_s` must point to `len` readable doubles.
 */
enum OnebitStatus onebit_config_set_source_powers(struct OnebitConfig *cfg,
                                                  const double *p_s,
                                                  size_t len);

/**
 * Sets both hops' large-scale fading; each array holds `len = K` entries.
 *
 * # Safety
 * `cfg` must be a live handle; `beta_sr` and `beta_rd` must point to `len`
 * readable doubles each.
 */
enum OnebitStatus onebit_config_set_large_scale(struct OnebitConfig *cfg,
                                                const double *beta_sr,
                                                const double *beta_rd,
                                                size_t len);

/**
 * Number of user pairs K, or 0 for a NULL handle.
 *
 * # Safety
 * `cfg` must be NULL or a live handle.
 */
size_t onebit_config_users(const struct OnebitConfig *cfg);

/**
 * Closed-form per-user rates (bits/s/Hz) for hardware case 1..=4
 * (I: ideal converters, IV: one-bit ADCs and DACs). `sum` may be NULL.
 *
 * # Safety
 * `cfg` must be a live handle; `per_user` must point to `len` writable
 * doubles; `sum` must be NULL or writable.
 */
enum OnebitStatus onebit_closed_form_rate(const struct OnebitConfig *cfg,
                                          uint32_t hw,
                                          bool with_prefactor,
                                          double *per_user,
                                          size_t len,
                                          double *sum);

/**
 * Monte-Carlo rates for one-bit ADCs and DACs. `exact` selects per-realization
 * converter statistics instead of the large-array approximation. `std_err`
 * and `sum` may be NULL. Results depend only on `seed` and `trials`.
 *
 * # Safety
 * `cfg` must be a live handle; `per_user` (and `std_err` unless NULL) must
 * point to `len` writable doubles; `sum` must be NULL or writable.
 */
enum OnebitStatus onebit_mc_rate(const struct OnebitConfig *cfg,
                                 size_t trials,
                                 uint64_t seed,
                                 bool exact,
                                 bool with_prefactor,
                                 double *per_user,
                                 double *std_err,
                                 size_t len,
                                 double *sum);

/**
 * Sum-rate-maximizing powers for one-bit ADCs and DACs under
 * `sum(p_s) + p_r <= total_power`. Returns `Infeasible` when no allocation
 * is found; `p_r` and `sum_rate` may be NULL.
 *
 * # Safety
 * `cfg` must be a live handle; `p_s` must point to `len` writable doubles;
 * `p_r` and `sum_rate` must be NULL or writable.
 */
enum OnebitStatus onebit_power_alloc(const struct OnebitConfig *cfg,
                                     double total_power,
                                     double epsilon,
                                     double theta,
                                     double *p_s,
                                     size_t len,
                                     double *p_r,
                                     double *sum_rate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONEBIT_RELAY_H */
