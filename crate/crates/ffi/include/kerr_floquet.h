#ifndef KERR_FLOQUET_H
#define KERR_FLOQUET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define KF_BASIS_SYSTEM_PHOTONS 0

#define KF_BASIS_PUMP_PHOTONS 1

#define KF_MODEL_EXACT 0

#define KF_MODEL_EFFECTIVE_1A 1

#define KF_MODEL_EFFECTIVE_1B 2

#define KF_MODEL_EFFECTIVE_2B 3

#define KF_CONVENTION_STANDARD 0

#define KF_CONVENTION_DEGENERACY 1

typedef enum KfStatus {
  KF_STATUS_OK = 0,
  KF_STATUS_NULL_POINTER = 1,
  KF_STATUS_INVALID_PARAMETER = 2,
  KF_STATUS_DIMENSION_MISMATCH = 3,
  KF_STATUS_NON_CONVERGENCE = 4,
  KF_STATUS_TRUNCATION = 5,
  KF_STATUS_NOT_BRACKETED = 6,
  KF_STATUS_NUMERICAL = 7,
  KF_STATUS_BUFFER_TOO_SMALL = 8,
  KF_STATUS_PANIC = 9,
  KF_STATUS_OTHER = 10,
} KfStatus;

/**
 * Dense complex matrix on a truncated Fock space.
 */
typedef struct KfOperator KfOperator;

/**
 * Physical parameters of the driven oscillator.
 */
typedef struct KfParams KfParams;

/**
 * Sampled classical trajectory.
 */
typedef struct KfTrajectory KfTrajectory;

typedef struct KfRwaCoefficients {
  double delta_c;
  double u_c;
  double f_c;
  double omega_c;
} KfRwaCoefficients;

typedef struct KfSteadyState {
  double u;
  double v;
  double amplitude;
  /**
   * 1 when linearly stable.
   */
  int32_t stable;
} KfSteadyState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread, NUL-terminated and
 * truncated to `cap` bytes. Returns the full message length, 0 when no
 * error has occurred.
 *
 * `buf` must be null or valid for `cap` bytes.
 */
size_t kf_last_error(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kf_version(void);

/**
 * Lab-frame parameters; `gamma = 0` and `hbar = 1` until set.
 */
enum KfStatus kf_params_new(double m,
                            double omega0,
                            double alpha,
                            double force,
                            double omega,
                            struct KfParams **params);

/**
 * Parameters from the system-photon Kerr shift `u_a`, pump strength
 * `f_a` and detuning `delta_a = omega - omega0`.
 */
enum KfStatus kf_params_from_a_basis(double m,
                                     double omega0,
                                     double hbar,
                                     double u_a,
                                     double f_a,
                                     double delta_a,
                                     struct KfParams **params);

enum KfStatus kf_params_set_gamma(struct KfParams *params, double gamma);

enum KfStatus kf_params_set_hbar(struct KfParams *params, double hbar);

enum KfStatus kf_params_set_omega(struct KfParams *params, double omega);

/**
 * Writes `[m, omega0, alpha, force, omega, gamma, hbar]`.
 *
 * `params` must be a live handle and `values` valid for 7 writes.
 */
enum KfStatus kf_params_get(const struct KfParams *params, double *values);

void kf_params_free(struct KfParams *params);

/**
 * Rotating-frame coefficients in one of the two oscillator bases.
 */
enum KfStatus kf_rwa_coefficients(const struct KfParams *params,
                                  int32_t basis,
                                  struct KfRwaCoefficients *coeffs);

/**
 * Fixed points of the averaged slow flow in ascending amplitude. Writes
 * at most `cap` entries and the total count to `count`; fails with
 * `BufferTooSmall` when `cap` is short.
 *
 * `params` must be a live handle, `states` valid for `cap` writes and
 * `count` valid for a write.
 */
enum KfStatus kf_kb_steady_states(const struct KfParams *params,
                                  struct KfSteadyState *states,
                                  size_t cap,
                                  size_t *count);

/**
 * Integrates the lab-frame equations from `(x0, p0)` at `t = 0` to `t1`,
 * sampled `samples_per_period` times per drive period.
 */
enum KfStatus kf_integrate(const struct KfParams *params,
                           double x0,
                           double p0,
                           double t1,
                           double tol,
                           size_t samples_per_period,
                           struct KfTrajectory **traj);

size_t kf_trajectory_len(const struct KfTrajectory *traj);

/**
 * Copies samples into caller buffers of length `cap`; any of `t`, `x`,
 * `p` may be null to skip it.
 *
 * `traj` must be a live handle and each non-null buffer valid for `cap`
 * writes.
 */
enum KfStatus kf_trajectory_copy(const struct KfTrajectory *traj,
                                 double *t,
                                 double *x,
                                 double *p,
                                 size_t cap);

/**
 * Amplitude of the `omega` component over the last `n_periods` periods.
 */
enum KfStatus kf_lockin_amplitude(const struct KfTrajectory *traj,
                                  double omega,
                                  size_t n_periods,
                                  double *amplitude);

void kf_trajectory_free(struct KfTrajectory *traj);

/**
 * Effective Hamiltonian of order 1 or 2 on `dim` number states.
 */
enum KfStatus kf_effective_hamiltonian(const struct KfParams *params,
                                       int32_t basis,
                                       uint32_t order,
                                       size_t dim,
                                       struct KfOperator **op);

size_t kf_operator_dim(const struct KfOperator *op);

/**
 * `op` must be a live handle and `re`, `im` valid for writes.
 */
enum KfStatus kf_operator_get(const struct KfOperator *op,
                              size_t row,
                              size_t col,
                              double *re,
                              double *im);

void kf_operator_free(struct KfOperator *op);

/**
 * Stationary period-averaged photon number with loss rate `kappa` on
 * `dim` number states.
 */
enum KfStatus kf_stationary_photon_number(const struct KfParams *params,
                                          int32_t model,
                                          double kappa,
                                          size_t dim,
                                          double *n_avg);

/**
 * Detuning `omega - omega0` of the `n`-th multiphoton resonance.
 */
enum KfStatus kf_mpr_predicted(const struct KfParams *params,
                               int32_t basis,
                               uint32_t n,
                               int32_t convention,
                               double *delta_a);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KERR_FLOQUET_H */
