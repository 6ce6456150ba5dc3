#ifndef MAXENT_H
#define MAXENT_H

/* Generated by cbindgen from the maxent-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome. Anything but `Ok` leaves a message in [`mx_last_error`].
 */
typedef enum MxStatus {
  /**
   * Success.
   */
  MX_STATUS_OK = 0,
  /**
   * Null pointer, bad length, or an argument outside its domain.
   */
  MX_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The inputs admit arbitrage or fail slice validation.
   */
  MX_STATUS_ARBITRAGE = 2,
  /**
   * A solver failed to converge or the density is not integrable.
   */
  MX_STATUS_NON_CONVERGENCE = 3,
  /**
   * A query argument is outside the representable range.
   */
  MX_STATUS_OUT_OF_RANGE = 4,
  /**
   * File I/O or parse failure.
   */
  MX_STATUS_IO = 5,
  /**
   * An internal invariant was violated; the library state is still valid.
   */
  MX_STATUS_PANIC = 6,
} MxStatus;

/**
 * Opaque calibrated density.
 */
typedef struct MxDensity MxDensity;

/**
 * Opaque validated market slice (undiscounted prices, zero strike included).
 */
typedef struct MxSlice MxSlice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread; never free it.
 */
const char *mx_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mx_version(void);

/**
 * Build a validated slice from undiscounted price arrays of length `len`
 * that include the synthetic zero strike: `strikes[0] = 0`,
 * `calls[0]` = forward, `digitals[0] = 1`.
 *
 * # Safety
 * The three arrays must be readable for `len` elements and `out` writable.
 */
enum MxStatus mx_slice_new(const double *strikes,
                           const double *calls,
                           const double *digitals,
                           size_t len,
                           double maturity,
                           double discount_factor,
                           struct MxSlice **out);

/**
 * Read a quote CSV (same format as the CLI) into a validated slice.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum MxStatus mx_slice_from_file(const char *path, struct MxSlice **out);

/**
 * Free a slice handle. Null is a no-op.
 *
 * # Safety
 * `slice` must come from this library and not be freed twice.
 */
void mx_slice_free(struct MxSlice *slice);

/**
 * Free a density handle. Null is a no-op.
 *
 * # Safety
 * `density` must come from this library and not be freed twice.
 */
void mx_density_free(struct MxDensity *density);

/**
 * Maximum-entropy density from the slice's calls and digitals.
 *
 * # Safety
 * `slice` must be a live slice handle and `out` writable.
 */
enum MxStatus mx_med_calibrate(const struct MxSlice *slice, struct MxDensity **out);

/**
 * Calls-only maximum-entropy density from arrays of length `len` that
 * include the zero strike (`strikes[0] = 0`, `calls[0]` = forward).
 *
 * # Safety
 * The arrays must be readable for `len` elements and `out` writable.
 */
enum MxStatus mx_bk_calibrate(const double *strikes,
                              const double *calls,
                              size_t len,
                              struct MxDensity **out);

/**
 * Minimum relative-entropy density against a log-normal prior with the
 * slice's forward and maturity.
 *
 * # Safety
 * `slice` must be a live slice handle and `out` writable.
 */
enum MxStatus mx_mred_calibrate_lognormal(const struct MxSlice *slice,
                                          double sigma,
                                          struct MxDensity **out);

/**
 * Minimum relative-entropy density against a piecewise-exponential prior
 * (`prior` must be a density from [`mx_med_calibrate`]).
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum MxStatus mx_mred_calibrate_med_prior(const struct MxSlice *slice,
                                          const struct MxDensity *prior,
                                          struct MxDensity **out);

/**
 * Density value at `x`; NaN on a null handle.
 *
 * # Safety
 * `density` must be null or a live density handle.
 */
double mx_density_pdf(const struct MxDensity *density, double x);

/**
 * Undiscounted call price; NaN on a null handle.
 *
 * # Safety
 * `density` must be null or a live density handle.
 */
double mx_density_call(const struct MxDensity *density, double strike);

/**
 * Undiscounted digital price; NaN on a null handle.
 *
 * # Safety
 * `density` must be null or a live density handle.
 */
double mx_density_digital(const struct MxDensity *density, double strike);

/**
 * CDF at `x`; NaN on a null handle.
 *
 * # Safety
 * `density` must be null or a live density handle.
 */
double mx_density_cdf(const struct MxDensity *density, double x);

/**
 * Spot delta of the call at `strike` for discount factor `df`; NaN on a
 * null handle.
 *
 * # Safety
 * `density` must be null or a live density handle.
 */
double mx_density_delta(const struct MxDensity *density, double strike, double df);

/**
 * Inverse CDF at `level` in [0, 1); writes the quantile to `out`.
 *
 * # Safety
 * `density` must be a live density handle and `out` writable.
 */
enum MxStatus mx_density_inverse_cdf(const struct MxDensity *density, double level, double *out);

/**
 * Fill `out` with `n` inverse-transform samples from a seeded deterministic
 * stream; the same `(seed, n)` always yields the same values.
 *
 * # Safety
 * `density` must be a live density handle and `out` writable for `n`
 * elements.
 */
enum MxStatus mx_density_sample(const struct MxDensity *density,
                                size_t n,
                                uint64_t seed,
                                double *out);

/**
 * Number of parameter rows reported by [`mx_density_params`].
 *
 * # Safety
 * `density` must be null or a live density handle.
 */
size_t mx_density_param_count(const struct MxDensity *density);

/**
 * Write parameter rows as `count` consecutive `(position, a, b)` triples:
 * bucket `(lower, alpha, beta)` for maximum-entropy densities, bound
 * `(lower, gamma, delta)` for relative-entropy densities, and
 * `(strike, lambda, 0)` for calls-only densities.
 *
 * # Safety
 * `density` must be a live density handle and `out` writable for
 * `3 * mx_density_param_count(density)` elements.
 */
enum MxStatus mx_density_params(const struct MxDensity *density, double *out);

/**
 * Boltzmann-Shannon entropy; fails unless the density is maximum-entropy.
 *
 * # Safety
 * `density` must be a live density handle and `out` writable.
 */
enum MxStatus mx_density_entropy(const struct MxDensity *density, double *out);

/**
 * I-divergence to the prior; fails unless the density is relative-entropy.
 *
 * # Safety
 * `density` must be a live density handle and `out` writable.
 */
enum MxStatus mx_density_divergence(const struct MxDensity *density, double *out);

/**
 * Normalizing constant of a calls-only density; fails for other kinds.
 *
 * # Safety
 * `density` must be a live density handle and `out` writable.
 */
enum MxStatus mx_density_normalizer(const struct MxDensity *density, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAXENT_H */
