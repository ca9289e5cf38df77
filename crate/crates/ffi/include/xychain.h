#ifndef XYCHAIN_H
#define XYCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The numeric values of the error codes match the exit
 * codes of the `xychain` command-line tool where they overlap.
 */
typedef enum XyStatus {
  XY_STATUS_OK = 0,
  /**
   * Invalid parameters or arguments.
   */
  XY_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A numerical-integrity check failed.
   */
  XY_STATUS_NUMERICAL = 3,
  /**
   * A null pointer was passed where a valid one is required.
   */
  XY_STATUS_NULL_POINTER = 5,
  /**
   * An output buffer is too small.
   */
  XY_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  XY_STATUS_INTERNAL = 7,
} XyStatus;

typedef enum XyAxis {
  XY_AXIS_X = 1,
  XY_AXIS_Y = 2,
  XY_AXIS_Z = 3,
} XyAxis;

/**
 * Ground state of one chain. Opaque to C.
 */
typedef struct XyChain XyChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Solves the chain and stores a new handle in `*out`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum XyStatus xy_chain_new(size_t n, double gamma, double lambda, struct XyChain **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `chain` must come from `xy_chain_new` and not have been freed already.
 */
void xy_chain_free(struct XyChain *chain);

/**
 * Number of sites.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
enum XyStatus xy_chain_sites(const struct XyChain *chain, size_t *out);

/**
 * Ground-state energy and fermion boundary condition (`1` when periodic,
 * i.e. odd spin parity; `0` when antiperiodic).
 *
 * # Safety
 * `chain` must be a live handle; both outputs writable.
 */
enum XyStatus xy_chain_ground_state(const struct XyChain *chain, double *energy, int32_t *periodic);

/**
 * Expectation value of the Pauli string with `axes[i]` on `sites[i]`.
 *
 * # Safety
 * `sites` and `axes` must point to `len` readable elements (may be null if
 * `len` is 0); `chain` must be a live handle and `out` writable.
 */
enum XyStatus xy_pauli_expectation(const struct XyChain *chain,
                                   const size_t *sites,
                                   const enum XyAxis *axes,
                                   size_t len,
                                   double *out);

/**
 * Generalized tangle `T_k`, `1 ≤ k ≤ 4`. The subset purities are computed
 * on first use and kept with the handle, so later orders are cheap.
 *
 * # Safety
 * `chain` must be a live handle not used concurrently from another thread;
 * `out` writable.
 */
enum XyStatus xy_tangle(struct XyChain *chain, size_t k, double *out);

/**
 * Entropy in bits of the spins `0, L, 2L, 3L`.
 *
 * # Safety
 * `chain` must be a live handle and `out` writable.
 */
enum XyStatus xy_entropy_spaced(const struct XyChain *chain, size_t spacing, double *out);

/**
 * Quasimomentum distribution `n(q)`, `q = 0..N`, written to `out[0..N]`.
 *
 * # Safety
 * `out` must point to `capacity` writable doubles; `chain` must be live.
 */
enum XyStatus xy_quasimomentum(const struct XyChain *chain, double *out, size_t capacity);

/**
 * `n(0)` and the noise correlation `Δ(0,0)`.
 *
 * # Safety
 * `chain` must be a live handle; both outputs writable.
 */
enum XyStatus xy_zero_mode_noise(const struct XyChain *chain, double *n0, double *delta00);

/**
 * `(1 + N)/8`, the largest `Δ(0,0)` any product state can reach.
 */
double xy_separability_threshold(size_t n);

/**
 * Message of the last failure on this thread, or null if none. The string
 * stays valid until the next failing call on the same thread.
 */
const char *xy_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *xy_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XYCHAIN_H */
