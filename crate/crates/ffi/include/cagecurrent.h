#ifndef CAGECURRENT_H
#define CAGECURRENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_UTF8 = 2,
  CC_STATUS_CONFIG = 3,
  CC_STATUS_PARAMETER = 4,
  CC_STATUS_NUMERICAL = 5,
  CC_STATUS_IO = 6,
  CC_STATUS_OUT_OF_RANGE = 7,
  // A point query was made before `cc_simulation_excite`.
  CC_STATUS_NOT_EXCITED = 8,
  CC_STATUS_PANIC = 9,
} CcStatus;

// Opaque simulation handle.
typedef struct CcSimulation CcSimulation;

// Observables at one scan point. `rho_ratio` is NaN when undefined.
typedef struct CcRecord {
  int32_t charge;
  double omega_ev;
  double rho_ratio;
  double rho0_nm;
  double mz_au;
  double mz_mub;
  double b_center_ut;
  double transverse_moment_au;
  double validity;
  double j_rho;
  double j_phi;
  double j_z;
  // 1 when at least one matrix element survives cancellation.
  uint8_t coupled;
} CcRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cc_version(void);

// Message of the last failed call on this thread, empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *cc_last_error(void);

// Builds a simulation from TOML text. An empty string selects the defaults.
//
// # Safety
// `config_toml` must be a valid NUL-terminated string and `out` a valid
// pointer to writable storage.
enum CcStatus cc_simulation_new(const char *config_toml, struct CcSimulation **out);

// Releases a handle. Null is accepted.
//
// # Safety
// `sim` must come from `cc_simulation_new` and not have been freed.
void cc_simulation_free(struct CcSimulation *sim);

// Evaluates every configured scan point and stores the records.
//
// # Safety
// `sim` must be a live handle; `count` may be null.
enum CcStatus cc_simulation_evaluate(struct CcSimulation *sim, size_t *count);

// Copies record `index` from the last evaluation.
//
// # Safety
// `sim` must be a live handle and `out` writable.
enum CcStatus cc_simulation_record(const struct CcSimulation *sim,
                                   size_t index,
                                   struct CcRecord *out);

// Computes and keeps the post-pulse state for one beam placement, for
// later point queries. The axis is placed at `rho_ratio * rho_max` unless
// `rho_ratio` is NaN, in which case `rho0_nm` is used.
//
// # Safety
// `sim` must be a live handle; `validity` may be null.
enum CcStatus cc_simulation_excite(struct CcSimulation *sim,
                                   int32_t charge,
                                   double omega_ev,
                                   double rho0_nm,
                                   double rho_ratio,
                                   double *validity);

// DC current density (a.u., configured sign convention) at a point in
// bohr, for the state from the last `cc_simulation_excite`.
//
// # Safety
// `sim` must be a live handle, `point` must hold 3 doubles and `out` room
// for 3 doubles.
enum CcStatus cc_simulation_current(const struct CcSimulation *sim,
                                    const double *point,
                                    double *out);

// Radius of peak beam intensity, in the units of `waist`.
//
// # Safety
// `out` must be writable.
enum CcStatus cc_rho_max(int32_t charge, double waist, double *out);

// Envelope width parameter (a.u.) for an intensity FWHM in femtoseconds.
//
// # Safety
// `out` must be writable.
enum CcStatus cc_delta_from_fwhm(double fwhm_fs, double *out);

// Vector-potential amplitude (a.u.) for an intensity in W/cm^2 at photon
// energy `omega` (hartree).
//
// # Safety
// `out` must be writable.
enum CcStatus cc_a0_from_intensity(double intensity_w_cm2, double omega, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAGECURRENT_H */
