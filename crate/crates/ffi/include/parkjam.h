#ifndef PARKJAM_H
#define PARKJAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PJ_MODE_THERMODYNAMIC 0

#define PJ_MODE_FREE_BOUNDARY 1

typedef enum PjStatus {
  PJ_STATUS_OK = 0,
  PJ_STATUS_NULL_POINTER = 1,
  // Bad dimension, mismatched site, out-of-range parameter.
  PJ_STATUS_INVALID_ARGUMENT = 2,
  // The armour search left the cap box. Retry with a larger cap.
  PJ_STATUS_ARMOUR_OVERFLOW = 3,
  PJ_STATUS_BUFFER_TOO_SMALL = 4,
  PJ_STATUS_RUNTIME = 5,
  PJ_STATUS_PANIC = 6,
} PjStatus;

// Opaque handle to a random field.
typedef struct PjField PjField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next `pj_` call on the same thread.
const char *pj_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *pj_version(void);

// Creates a field of dimension `dim` (1 to 4). Free it with `pj_field_free`.
//
// # Safety
// `out` must be valid for writes.
enum PjStatus pj_field_new(uint64_t seed, uint32_t dim, struct PjField **out);

// # Safety
// `field` must come from `pj_field_new` and not be used afterwards. NULL is ignored.
void pj_field_free(struct PjField *field);

// Dimension of the field, or 0 for NULL.
//
// # Safety
// `field` must be NULL or a live handle.
uint32_t pj_field_dim(const struct PjField *field);

// Mark U(i) at the site with `len` coordinates.
//
// # Safety
// `coords` must point to `len` integers; `out` must be valid for writes.
enum PjStatus pj_uniform_at(const struct PjField *field,
                            const int32_t *coords,
                            size_t len,
                            double *out);

// Whether site `a` is visited before site `b`.
//
// # Safety
// `a` and `b` must point to `len` integers; `out` must be valid for writes.
enum PjStatus pj_rank_less(const struct PjField *field,
                           const int32_t *a,
                           const int32_t *b,
                           size_t len,
                           bool *out);

// Occupancy of one site in the jammed infinite-volume configuration.
//
// # Safety
// `coords` must point to `len` integers; `out` must be valid for writes.
enum PjStatus pj_sample_x(const struct PjField *field,
                          const int32_t *coords,
                          size_t len,
                          uint32_t cap,
                          uint8_t *out);

// Number of sites in a box of the given radius, `(2 radius + 1)^dim`.
uint64_t pj_box_len(uint32_t dim, uint32_t radius);

// Infinite-volume occupancy on the box of `radius` around `center`.
// Sites are written in row-major order, last coordinate fastest.
// `out_len` must be at least `pj_box_len`; otherwise nothing is written.
//
// # Safety
// `center` must point to `len` integers; `out` must be valid for `out_len` bytes.
enum PjStatus pj_sample_window(const struct PjField *field,
                               const int32_t *center,
                               size_t len,
                               uint32_t radius,
                               uint32_t cap,
                               uint8_t *out,
                               size_t out_len);

// Occupied count of the free-boundary jam of the origin-centred box.
//
// # Safety
// `out` must be valid for writes.
enum PjStatus pj_jam_box_count(const struct PjField *field, uint32_t radius, uint64_t *out);

// Jamming density of the line, computed exactly.
//
// # Safety
// `out` must be valid for writes.
enum PjStatus pj_exact_rho(double *out);

// The armour-tail constant B for dimension `d`.
//
// # Safety
// `out` must be valid for writes.
enum PjStatus pj_constant_b(uint32_t d, double *out);

// Upper bound on P(|N_n - E N_n| > eps) in the thermodynamic setting.
//
// # Safety
// `out` must be valid for writes.
enum PjStatus pj_concentration_bound(uint32_t d, uint32_t n, double eps, double *out);

// Same bound for the free-boundary line.
//
// # Safety
// `out` must be valid for writes.
enum PjStatus pj_concentration_bound_free(uint32_t n, double eps, double *out);

// Bound on P(|N - N̄| > m) for the boundary coupling on the line.
//
// # Safety
// `out` must be valid for writes.
enum PjStatus pj_coupling_bound(double m, double *out);

// Bound on |E N_n - rho |Λ_n||.
//
// # Safety
// `out` must be valid for writes.
enum PjStatus pj_mean_dev_bound(uint32_t d, uint32_t n, double *out);

// Monte Carlo density on the radius-`n` box with replicate seeds
// `seed, seed + 1, ...`. Uses rayon's global pool.
//
// # Safety
// `mean` and `stderr` must be valid for writes.
enum PjStatus pj_estimate_density(uint32_t d,
                                  uint32_t n,
                                  uint64_t replicates,
                                  uint64_t seed,
                                  uint32_t mode,
                                  uint32_t cap,
                                  double *mean,
                                  double *stderr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARKJAM_H */
