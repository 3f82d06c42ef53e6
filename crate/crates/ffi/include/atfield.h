#ifndef ATFIELD_H
#define ATFIELD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum AtfStatus {
  ATF_STATUS_OK = 0,
  ATF_STATUS_CONTRACT = 1,
  ATF_STATUS_CONFIG = 2,
  ATF_STATUS_NON_CONVERGENCE = 3,
  ATF_STATUS_SOLVER = 4,
  ATF_STATUS_PARSE = 5,
  ATF_STATUS_IO = 6,
  ATF_STATUS_NULL_POINTER = 7,
  ATF_STATUS_PANIC = 8,
} AtfStatus;

/**
 * Opaque 1D state.
 */
typedef struct AtfState AtfState;

/**
 * Energy split of a state.
 */
typedef struct AtfEnergy {
  double bulk;
  double grad_surface;
  double potential_surface;
  double total;
  double modica_mortola;
  double equipartition_residual;
} AtfEnergy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *atf_last_error(void);

/**
 * Minimal Mumford-Shah energy `min(a^2 / L, 1)` of the 1D problem.
 *
 * # Safety
 * `out` must be null or point to writable storage for a double.
 */
enum AtfStatus atf_ms_min_value(double a, double length, double *out);

/**
 * Affine-branch critical point on `n` cells by alternating minimization from `v = 1`.
 *
 * # Safety
 * `out` must be null or point to writable storage for a state pointer.
 */
enum AtfStatus atf_solve_affine(double a,
                                double length,
                                double eps,
                                double eta,
                                size_t n,
                                struct AtfState **out);

/**
 * Jump-branch critical point on `n` (even) cells through the constrained
 * half-interval construction with bound `alpha` on `v(L/2)`.
 *
 * # Safety
 * `out` must be null or point to writable storage for a state pointer.
 */
enum AtfStatus atf_solve_jump(double a,
                              double length,
                              double eps,
                              double eta,
                              size_t n,
                              double alpha,
                              struct AtfState **out);

/**
 * Build a state from nodal arrays of length `n_nodes`.
 *
 * # Safety
 * `u` and `v` must point to `n_nodes` readable doubles; `out` as above.
 */
enum AtfStatus atf_state_from_arrays(double length,
                                     double eps,
                                     double eta,
                                     double g0,
                                     double g1,
                                     const double *u,
                                     const double *v,
                                     size_t n_nodes,
                                     struct AtfState **out);

/**
 * Release a state. Null is ignored.
 *
 * # Safety
 * `state` must be null or a pointer returned by this library, not yet freed.
 */
void atf_state_free(struct AtfState *state);

/**
 * Number of grid nodes, or 0 for a null state.
 *
 * # Safety
 * `state` must be null or a live state pointer.
 */
size_t atf_state_n_nodes(const struct AtfState *state);

/**
 * Copy the nodal values of u into `buf` (capacity `len`).
 *
 * # Safety
 * `state` live or null; `buf` valid for `len` writes or null.
 */
enum AtfStatus atf_state_copy_u(const struct AtfState *state, double *buf, size_t len);

/**
 * Copy the nodal values of v into `buf` (capacity `len`).
 *
 * # Safety
 * `state` live or null; `buf` valid for `len` writes or null.
 */
enum AtfStatus atf_state_copy_v(const struct AtfState *state, double *buf, size_t len);

/**
 * Energy split of a state.
 *
 * # Safety
 * `state` live or null; `out` writable or null.
 */
enum AtfStatus atf_state_energy(const struct AtfState *state, struct AtfEnergy *out);

/**
 * Weak-residual norms of the u and v equations.
 *
 * # Safety
 * `state` live or null; outputs writable or null.
 */
enum AtfStatus atf_state_residuals(const struct AtfState *state, double *u_res, double *v_res);

/**
 * Mean flux `c` and its maximal deviation.
 *
 * # Safety
 * `state` live or null; outputs writable or null.
 */
enum AtfStatus atf_state_flux(const struct AtfState *state, double *c, double *dev);

/**
 * Write the state CSV.
 *
 * # Safety
 * `state` live or null; `path` a nul-terminated UTF-8 string or null.
 */
enum AtfStatus atf_state_write_csv(const struct AtfState *state, const char *path);

/**
 * Read a state CSV.
 *
 * # Safety
 * `path` a nul-terminated UTF-8 string or null; `out` as in the solvers.
 */
enum AtfStatus atf_state_read_csv(const char *path, struct AtfState **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATFIELD_H */
