#ifndef ACTDEG_H
#define ACTDEG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ActdegNorm {
  ACTDEG_NORM_H2 = 0,
  ACTDEG_NORM_HINF = 1,
} ActdegNorm;

typedef enum ActdegH2Convention {
  // `||G||_2^2 <= gamma`.
  ACTDEG_H2_CONVENTION_TRACE = 0,
  // `||G||_2 <= gamma`.
  ACTDEG_H2_CONVENTION_NORM = 1,
} ActdegH2Convention;

typedef enum ActdegStatus {
  ACTDEG_STATUS_OK = 0,
  ACTDEG_STATUS_INVALID_INPUT = 1,
  ACTDEG_STATUS_INFEASIBLE = 2,
  ACTDEG_STATUS_NUMERICAL_FAILURE = 3,
  ACTDEG_STATUS_VERIFICATION_FAILED = 4,
  ACTDEG_STATUS_DIVERGED = 5,
  ACTDEG_STATUS_UNSTABLE = 6,
  ACTDEG_STATUS_NULL_POINTER = 7,
  ACTDEG_STATUS_BUFFER_TOO_SMALL = 8,
  ACTDEG_STATUS_NO_SOLUTION = 9,
  ACTDEG_STATUS_PANIC = 10,
} ActdegStatus;

// Plant and its model metadata.
typedef struct ActdegPlant ActdegPlant;

// Outcome of one synthesis run.
typedef struct ActdegResult ActdegResult;

typedef struct ActdegSynthOptions {
  enum ActdegNorm norm;
  double gamma;
  double lambda_a;
  double lambda_wc;
  double lambda_xf;
  enum ActdegH2Convention h2_convention;
  // Constraint tolerance for validation; `<= 0` keeps the default
  // (or `ACTDEG_SOLVER_TOL` when set).
  double solver_tol;
} ActdegSynthOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *actdeg_version(void);

// Message for the last failed call on this thread, or NULL. Valid until
// the next `actdeg_*` call on the same thread.
const char *actdeg_last_error(void);

// Default options: unit weights on all three objective terms and the
// trace convention for H2.
struct ActdegSynthOptions actdeg_synth_options_default(enum ActdegNorm norm, double gamma);

// Parse a model document (`actdeg-model` schema).
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum ActdegStatus actdeg_plant_from_json(const char *json, struct ActdegPlant **out);

// The bundled F-16 longitudinal model.
//
// # Safety
// `out` must be a valid pointer.
enum ActdegStatus actdeg_plant_f16(struct ActdegPlant **out);

// Build a plant from row-major arrays. `dd` may be NULL for a zero
// feedthrough; `wd` holds `nd` disturbance weights.
//
// # Safety
// Each non-NULL array must hold the number of values implied by the
// dimensions; `out` must be a valid pointer.
enum ActdegStatus actdeg_plant_new(size_t nx,
                                   size_t nu,
                                   size_t nd,
                                   size_t nz,
                                   const double *a,
                                   const double *bu,
                                   const double *bd,
                                   const double *cz,
                                   const double *dd,
                                   const double *wd,
                                   struct ActdegPlant **out);

// # Safety
// `plant` must be NULL or a handle from an `actdeg_plant_*` constructor
// that has not been freed.
void actdeg_plant_free(struct ActdegPlant *plant);

// # Safety
// `plant` must be a live handle; output pointers may be NULL.
enum ActdegStatus actdeg_plant_dims(const struct ActdegPlant *plant,
                                    size_t *nx,
                                    size_t *nu,
                                    size_t *nd,
                                    size_t *nz);

// Model document for the plant. Free with [`actdeg_string_free`].
//
// # Safety
// `plant` must be a live handle.
char *actdeg_plant_to_json(const struct ActdegPlant *plant);

// H2 norm of `(A, B, C)` with `n` states, `m` inputs and `p` outputs.
//
// # Safety
// Arrays must be row-major of the implied sizes; `out` must be valid.
enum ActdegStatus actdeg_h2_norm(size_t n,
                                 size_t m,
                                 size_t p,
                                 const double *a,
                                 const double *b,
                                 const double *c,
                                 double *out);

// H-infinity norm of `(A, B, C)` to relative tolerance `tol`.
//
// # Safety
// Arrays must be row-major of the implied sizes; `out` must be valid.
enum ActdegStatus actdeg_hinf_norm(size_t n,
                                   size_t m,
                                   size_t p,
                                   const double *a,
                                   const double *b,
                                   const double *c,
                                   double tol,
                                   double *out);

// Solve the synthesis program and validate the optimum.
//
// A result handle is written to `out` whenever the solver ran, including
// infeasible and unverified outcomes; the return value is then the same as
// [`actdeg_result_status`]. On input errors `*out` is set to NULL.
//
// # Safety
// `plant` must be a live handle, `options` and `out` valid pointers.
enum ActdegStatus actdeg_synthesize(const struct ActdegPlant *plant,
                                    const struct ActdegSynthOptions *options,
                                    struct ActdegResult **out);

// # Safety
// `result` must be NULL or a live handle from [`actdeg_synthesize`].
void actdeg_result_free(struct ActdegResult *result);

// # Safety
// `result` must be a live handle.
enum ActdegStatus actdeg_result_status(const struct ActdegResult *result);

// Number of actuators and plant states of the gain `K` (`nu x nx`).
//
// # Safety
// `result` must be a live handle; output pointers may be NULL.
enum ActdegStatus actdeg_result_dims(const struct ActdegResult *result, size_t *nu, size_t *nx);

// Copy the gain `K` (row-major, `nu x nx`) into `buf`.
//
// # Safety
// `result` must be a live handle and `buf` hold `len` doubles.
enum ActdegStatus actdeg_result_gain(const struct ActdegResult *result, double *buf, size_t len);

// Copy the actuator cutoff frequencies (rad/s, `nu` values).
//
// # Safety
// `result` must be a live handle and `buf` hold `len` doubles.
enum ActdegStatus actdeg_result_omega_c(const struct ActdegResult *result, double *buf, size_t len);

// Copy the inverse noise intensities `kappa_a` (`nu` values).
//
// # Safety
// `result` must be a live handle and `buf` hold `len` doubles.
enum ActdegStatus actdeg_result_kappa_a(const struct ActdegResult *result, double *buf, size_t len);

// Copy the noise scalings `1/sqrt(kappa_a)` (`nu` values).
//
// # Safety
// `result` must be a live handle and `buf` hold `len` doubles.
enum ActdegStatus actdeg_result_noise_scale(const struct ActdegResult *result,
                                            double *buf,
                                            size_t len);

// # Safety
// `result` must be a live handle and `out` valid.
enum ActdegStatus actdeg_result_objective(const struct ActdegResult *result, double *out);

// # Safety
// `result` must be a live handle and `out` valid.
enum ActdegStatus actdeg_result_gamma_xf(const struct ActdegResult *result, double *out);

// Independently computed closed-loop norm of the optimum (squared H2 norm
// under the trace convention).
//
// # Safety
// `result` must be a live handle and `out` valid.
enum ActdegStatus actdeg_result_verified_norm(const struct ActdegResult *result, double *out);

// Full run report (`actdeg-report` schema). Free with
// [`actdeg_string_free`]; NULL on failure.
//
// # Safety
// `result` must be a live handle.
char *actdeg_result_to_json(const struct ActdegResult *result);

// # Safety
// `s` must be NULL or a string returned by this library.
void actdeg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACTDEG_H */
