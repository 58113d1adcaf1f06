#ifndef SPBM_H
#define SPBM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpbmStatus {
  SPBM_STATUS_OK = 0,
  SPBM_STATUS_NULL_POINTER = 1,
  SPBM_STATUS_INVALID_ARGUMENT = 2,
  SPBM_STATUS_UNSUPPORTED_DIMENSION = 3,
  SPBM_STATUS_UNCOVERABLE = 4,
  SPBM_STATUS_UNBOUNDED_LAW = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  SPBM_STATUS_INTERNAL = 6,
} SpbmStatus;

typedef enum SpbmVariant {
  SPBM_VARIANT_HALL_JANSON = 0,
  SPBM_VARIANT_CORRECTED = 1,
} SpbmVariant;

/**
 * Opaque marked point set in two or three dimensions.
 */
typedef struct SpbmProcess SpbmProcess;

typedef struct SpbmConstants {
  double theta_d;
  double alpha;
  double c_dky;
  double c0;
} SpbmConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread, NUL-terminated and
 * truncated to `capacity`, and returns its full length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `capacity` writable bytes.
 */
size_t spbm_last_error(char *buf, size_t capacity);

/**
 * Builds a process from `n` centers (row-major, `dim` coordinates each)
 * and `n` positive marks.
 *
 * # Safety
 * `centers` must hold `n * dim` values and `marks` `n` values; `out` must
 * be writable. The handle must be released with [`spbm_process_free`].
 */
enum SpbmStatus spbm_process_from_points(size_t dim,
                                         const double *centers,
                                         const double *marks,
                                         size_t n,
                                         struct SpbmProcess **out);

/**
 * Samples the process of intensity `t` with marks from `law` (for example
 * `"det:1"` or `"unif:0.5:1.5"`) on the box `[lo, hi]` widened by
 * `r * sup(law)`.
 *
 * # Safety
 * `lo` and `hi` must hold `dim` values, `law` must be a NUL-terminated
 * string and `out` writable.
 */
enum SpbmStatus spbm_process_sample(size_t dim,
                                    const double *lo,
                                    const double *hi,
                                    double t,
                                    const char *law,
                                    double r,
                                    uint64_t seed,
                                    uint64_t stream,
                                    struct SpbmProcess **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void spbm_process_free(struct SpbmProcess *p);

/**
 * # Safety
 * `p` must be a live handle and `out_len`, `out_dim` writable.
 */
enum SpbmStatus spbm_process_len(const struct SpbmProcess *p, size_t *out_len, size_t *out_dim);

/**
 * Exact `k`-coverage of `[lo, hi]` by the closed balls of radius `r * mark`.
 * `out_reliable` is 0 when the verdict rests on near-tangent configurations.
 *
 * # Safety
 * `p` must be a live handle, `lo`/`hi` hold the handle's dimension and the
 * outputs be writable.
 */
enum SpbmStatus spbm_is_covered(const struct SpbmProcess *p,
                                double r,
                                const double *lo,
                                const double *hi,
                                size_t k,
                                bool *out_covered,
                                bool *out_reliable);

/**
 * Coverage threshold of `[lo, hi]` to relative precision `tol_rel`.
 *
 * # Safety
 * As [`spbm_is_covered`].
 */
enum SpbmStatus spbm_coverage_threshold(const struct SpbmProcess *p,
                                        const double *lo,
                                        const double *hi,
                                        size_t k,
                                        double tol_rel,
                                        double *out);

/**
 * Number of interior local-minimum witnesses with fewer than `k` covering
 * balls in `[lo, hi]`, and the degenerate tuples skipped.
 *
 * # Safety
 * As [`spbm_is_covered`].
 */
enum SpbmStatus spbm_count_witnesses(const struct SpbmProcess *p,
                                     double r,
                                     const double *lo,
                                     const double *hi,
                                     size_t k,
                                     size_t *out_count,
                                     size_t *out_degenerate);

/**
 * Model constants for dimension `d >= 2`, order `k >= 1` and a mark law.
 *
 * # Safety
 * `law` must be a NUL-terminated string and `out` writable.
 */
enum SpbmStatus spbm_constants(size_t d, size_t k, const char *law, struct SpbmConstants *out);

/**
 * Radius scale `r_t` of the schedule at intensity `t > 1`; `variant` is
 * one of the [`SpbmVariant`] values.
 *
 * # Safety
 * `law` must be a NUL-terminated string and `out` writable.
 */
enum SpbmStatus spbm_scaling_radius(double t,
                                    size_t d,
                                    size_t k,
                                    double beta,
                                    uint32_t variant,
                                    const char *law,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPBM_H */
