#ifndef ZZFREE_H
#define ZZFREE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZzStatus {
  ZZ_STATUS_OK = 0,
  ZZ_STATUS_NULL_POINTER = 1,
  ZZ_STATUS_INVALID_ARGUMENT = 2,
  ZZ_STATUS_NUMERICAL = 3,
  ZZ_STATUS_AMBIGUOUS_LABELING = 4,
  ZZ_STATUS_IO = 5,
  ZZ_STATUS_PANIC = 6,
} ZzStatus;

/**
 * Opaque device handle.
 */
typedef struct ZzDevice ZzDevice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call; never NULL.
 */
const char *zz_last_error(void);

const char *zz_version(void);

/**
 * Table device `id` (1-7).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ZzStatus zz_device_builtin(uint32_t id, struct ZzDevice **out);

/**
 * Device file or builtin name such as `device2`.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ZzStatus zz_device_load(const char *source, struct ZzDevice **out);

/**
 * Release a handle. NULL is ignored.
 *
 * # Safety
 * `dev` must come from this library and not be used afterwards.
 */
void zz_device_free(struct ZzDevice *dev);

/**
 * Qubit frequencies and coupler reference in GHz.
 *
 * # Safety
 * `dev` must be a live handle and `out` point to three doubles.
 */
enum ZzStatus zz_device_frequencies(const struct ZzDevice *dev, double *out);

/**
 * Effective qubit-qubit coupling at coupler frequency `wc`, GHz.
 *
 * # Safety
 * `dev` must be a live handle and `out` a valid pointer.
 */
enum ZzStatus zz_g_eff(const struct ZzDevice *dev, double wc, double *out);

/**
 * Static ZZ at coupler frequency `wc`, GHz.
 *
 * # Safety
 * `dev` must be a live handle and `out` a valid pointer.
 */
enum ZzStatus zz_static_zz(const struct ZzDevice *dev, double wc, uint32_t levels, double *out);

/**
 * Genuine and affine idle coupler frequencies, NaN when absent.
 *
 * # Safety
 * `dev` must be a live handle; both outputs must be valid pointers.
 */
enum ZzStatus zz_idle_points(const struct ZzDevice *dev,
                             uint32_t levels,
                             double *genuine,
                             double *affine);

/**
 * Smallest CR amplitude cancelling the total ZZ at `wc` and the ZX rate
 * there, GHz; both NaN when none exists.
 *
 * # Safety
 * `dev` must be a live handle; both outputs must be valid pointers.
 */
enum ZzStatus zz_freedom_amplitude(const struct ZzDevice *dev,
                                   double wc,
                                   uint32_t levels,
                                   double *omega,
                                   double *alpha_zx);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZZFREE_H */
