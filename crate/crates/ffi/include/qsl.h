#ifndef QSL_H
#define QSL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QslStatus {
  QSL_STATUS_OK = 0,
  QSL_STATUS_NULL_POINTER = 1,
  // An argument is outside its domain.
  QSL_STATUS_DOMAIN = 2,
  // A root solve or case analysis failed.
  QSL_STATUS_NUMERICAL = 3,
  QSL_STATUS_INVALID_STATE = 4,
  QSL_STATUS_PANIC = 5,
} QslStatus;

// Opaque pure state: energies with complex amplitudes.
typedef struct QslState QslState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`) and returns the full message length
// in bytes, or 0 when there is no message.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t qsl_last_error(char *buf, size_t len);

// Speed-limit coefficient `alpha(delta)`.
//
// # Safety
// `out` must be null or valid for a write of a `double`.
enum QslStatus qsl_alpha(double delta, double *out);

// Mandelstam-Tamm numerator `arccos(sqrt(delta))`.
//
// # Safety
// `out` must be null or valid for a write of a `double`.
enum QslStatus qsl_mt_alpha(double delta, double *out);

// Minimax lower bound with an outer grid of `n_theta` points.
//
// # Safety
// `out` must be null or valid for a write of a `double`.
enum QslStatus qsl_lower_bound(double delta, size_t n_theta, double *out);

// Two-level upper bound.
//
// # Safety
// `out` must be null or valid for a write of a `double`.
enum QslStatus qsl_upper_bound(double delta, double *out);

// Slope `a(q)` of the tangent line with parameter `q >= 0`.
//
// # Safety
// `out` must be null or valid for a write of a `double`.
enum QslStatus qsl_a_of_q(double q, double *out);

// Tangency abscissa `y(q)`.
//
// # Safety
// `out` must be null or valid for a write of a `double`.
enum QslStatus qsl_y_of_q(double q, double *out);

// The tangency constants `y_minus` and `y_plus`.
//
// # Safety
// Both pointers must be null or valid for a write of a `double`.
enum QslStatus qsl_y_bounds(double *y_minus, double *y_plus);

// Builds a state from `n` levels. With `normalize` false the amplitudes
// must already have unit norm.
//
// # Safety
// `energies`, `re` and `im` must each be valid for `n` reads; `out` must
// be valid for a write.
enum QslStatus qsl_state_new(const double *energies,
                             const double *re,
                             const double *im,
                             size_t n,
                             bool normalize,
                             struct QslState **out);

// Random state of dimension `d` with energies in `[0, e_max]`.
//
// # Safety
// `out` must be valid for a write.
enum QslStatus qsl_state_random(size_t d, double e_max, uint64_t seed, struct QslState **out);

// Releases a state. Null is ignored.
//
// # Safety
// `state` must be null or a handle not yet freed.
void qsl_state_free(struct QslState *state);

// Number of levels carrying amplitude.
//
// # Safety
// `state` must be a live handle and `out` valid for a write.
enum QslStatus qsl_state_dimension(const struct QslState *state, size_t *out);

// Fidelity with the initial state after time `t >= 0`.
//
// # Safety
// `state` must be a live handle and `out` valid for a write.
enum QslStatus qsl_state_fidelity(const struct QslState *state, double t, double *out);

// Energy dispersion.
//
// # Safety
// `state` must be a live handle and `out` valid for a write.
enum QslStatus qsl_state_dispersion(const struct QslState *state, double *out);

// Mean energy above the lowest occupied level.
//
// # Safety
// `state` must be a live handle and `out` valid for a write.
enum QslStatus qsl_state_mean_excess_energy(const struct QslState *state, double *out);

// Margolus-Levitin type bound; `INFINITY` without excess energy.
//
// # Safety
// `state` must be a live handle and `out` valid for a write.
enum QslStatus qsl_state_ml_bound(const struct QslState *state, double delta, double *out);

// Mandelstam-Tamm bound; `INFINITY` without dispersion.
//
// # Safety
// `state` must be a live handle and `out` valid for a write.
enum QslStatus qsl_state_mt_bound(const struct QslState *state, double delta, double *out);

// First time the fidelity falls to `delta` within `horizon`, scanned on
// `n_grid` points. `found` is set to false when there is no crossing;
// `achieved` then holds the lowest fidelity seen.
//
// # Safety
// `state` must be a live handle; the out pointers must be valid writes.
enum QslStatus qsl_state_first_passage(const struct QslState *state,
                                       double delta,
                                       double horizon,
                                       size_t n_grid,
                                       bool *found,
                                       double *t_star,
                                       double *achieved);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSL_H */
