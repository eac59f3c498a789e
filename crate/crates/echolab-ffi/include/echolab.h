#ifndef ECHOLAB_H
#define ECHOLAB_H

/* Generated by cbindgen from crates/echolab-ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every function.
 */
typedef enum EcholabStatus {
  ECHOLAB_STATUS_OK = 0,
  ECHOLAB_STATUS_NULL_POINTER = 1,
  ECHOLAB_STATUS_DOMAIN = 2,
  ECHOLAB_STATUS_BASIS = 3,
  ECHOLAB_STATUS_DIM_GUARD = 4,
  ECHOLAB_STATUS_INCOMMENSURATE = 5,
  ECHOLAB_STATUS_EIGEN = 6,
  ECHOLAB_STATUS_FIT = 7,
  ECHOLAB_STATUS_MISSING_AMPLITUDE = 8,
  ECHOLAB_STATUS_IO = 9,
  ECHOLAB_STATUS_BUFFER_TOO_SMALL = 10,
  ECHOLAB_STATUS_PANIC = 11,
} EcholabStatus;

/**
 * A Floquet engine: kicked rotator or kicked top.
 */
typedef struct EcholabEngine EcholabEngine;

/**
 * A normalized pure state.
 */
typedef struct EcholabState EcholabState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *echolab_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *echolab_last_error(void);

/**
 * Kicked rotator on an even grid of `n` sites with kick strength `k`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum EcholabStatus echolab_rotator_new(size_t n, double k, struct EcholabEngine **out);

/**
 * Kicked top of spin `s` (a positive half-integer), torsion `k` and x-rotation `phi`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum EcholabStatus echolab_top_new(double s, double k, double phi, struct EcholabEngine **out);

/**
 * # Safety
 * `engine` must be null or a handle from this library that has not been freed.
 */
void echolab_engine_free(struct EcholabEngine *engine);

/**
 * Hilbert-space dimension, or 0 for a null handle.
 *
 * # Safety
 * `engine` must be null or a live handle.
 */
size_t echolab_engine_dim(const struct EcholabEngine *engine);

/**
 * Coherent packet on a grid of `n` sites centered at (x0, p0) ∈ [0, 2π)².
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum EcholabStatus echolab_state_torus_coherent(size_t n,
                                                double x0,
                                                double p0,
                                                struct EcholabState **out);

/**
 * Spin coherent state pointing at polar angle `theta` and azimuth `phi`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum EcholabStatus echolab_state_spin_coherent(double s,
                                               double theta,
                                               double phi,
                                               struct EcholabState **out);

/**
 * State with the given amplitudes in the basis of `engine`; the vector is normalized.
 *
 * # Safety
 * `re` and `im` must each point to `len` readable doubles; handles as for every other call.
 */
enum EcholabStatus echolab_state_from_amplitudes(const struct EcholabEngine *engine,
                                                 const double *re,
                                                 const double *im,
                                                 size_t len,
                                                 struct EcholabState **out);

/**
 * # Safety
 * `state` must be null or a handle from this library that has not been freed.
 */
void echolab_state_free(struct EcholabState *state);

/**
 * # Safety
 * `state` must be null or a live handle.
 */
size_t echolab_state_dim(const struct EcholabState *state);

/**
 * Copies the amplitudes into `re` and `im`, each holding at least `len` values.
 *
 * # Safety
 * `re` and `im` must each hold `len` writable doubles.
 */
enum EcholabStatus echolab_state_amplitudes(const struct EcholabState *state,
                                            double *re,
                                            double *im,
                                            size_t len);

/**
 * Advances `state` in place by `n` periods of `engine`.
 *
 * # Safety
 * Both handles must be null or live, and `state` must not be used concurrently.
 */
enum EcholabStatus echolab_engine_evolve(const struct EcholabEngine *engine,
                                         struct EcholabState *state,
                                         size_t n);

/**
 * Loschmidt echo M(t), t = 0..=n_max, written to `out` (at least n_max + 1 values).
 * `t_prep` > 0 first evolves the state with `f0` for that many periods.
 *
 * # Safety
 * `out` must hold `len` writable doubles; handles must be null or live.
 */
enum EcholabStatus echolab_loschmidt(const struct EcholabState *state,
                                     const struct EcholabEngine *f0,
                                     const struct EcholabEngine *f,
                                     size_t t_prep,
                                     size_t n_max,
                                     double *out,
                                     size_t len);

/**
 * Momentum (`spatial` = 0) or spatial (`spatial` ≠ 0) displacement echo by `m` lattice units.
 *
 * # Safety
 * `out` must hold `len` writable doubles; handles must be null or live.
 */
enum EcholabStatus echolab_displacement_echo(const struct EcholabState *state,
                                             const struct EcholabEngine *f0,
                                             double m,
                                             int32_t spatial,
                                             size_t n_max,
                                             double *out,
                                             size_t len);

/**
 * Benettin exponent of the standard map (`top` = 0) or the classical top (`top` ≠ 0).
 *
 * # Safety
 * `lambda` and `stderr_out` must be null or valid for writing one double.
 */
enum EcholabStatus echolab_lyapunov(int32_t top,
                                    double k,
                                    size_t n_init,
                                    size_t n_steps,
                                    uint64_t seed,
                                    double *lambda,
                                    double *stderr_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECHOLAB_H */
