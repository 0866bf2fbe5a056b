#ifndef NVDISS_H
#define NVDISS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The positive values match the command-line exit codes.
 */
typedef enum {
  NVDISS_STATUS_OK = 0,
  NVDISS_STATUS_INVALID_CONFIG = 2,
  NVDISS_STATUS_SOLVER_FAILURE = 3,
  NVDISS_STATUS_INVARIANT_VIOLATION = 4,
  NVDISS_STATUS_NULL_POINTER = 10,
  NVDISS_STATUS_INVALID_UTF8 = 11,
  NVDISS_STATUS_BUFFER_TOO_SMALL = 12,
  NVDISS_STATUS_NOT_FOUND = 13,
  NVDISS_STATUS_PANIC = 14,
} NvdissStatus;

/**
 * Opaque experiment description.
 */
typedef struct NvdissConfig NvdissConfig;

/**
 * Opaque result of a completed run.
 */
typedef struct NvdissRun NvdissRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nvdiss_version(void);

/**
 * Copies the calling thread's most recent error message.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes or null; `needed` must be valid or null.
 */
NvdissStatus nvdiss_last_error_message(char *buf, size_t cap, size_t *needed);

/**
 * Creates a config from an experiment or parameter preset name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be a valid pointer.
 */
NvdissStatus nvdiss_config_from_preset(const char *name, NvdissConfig **out);

/**
 * Creates a config from TOML text in the command-line config format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
NvdissStatus nvdiss_config_from_toml(const char *text, NvdissConfig **out);

/**
 * Releases a config; null is ignored.
 *
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void nvdiss_config_free(NvdissConfig *cfg);

/**
 * Sets a real system parameter by name (`gamma_phi`, `kappa`, `omega2`, ...).
 *
 * # Safety
 * `cfg` must be a live config handle and `name` a NUL-terminated string.
 */
NvdissStatus nvdiss_config_set_param(NvdissConfig *cfg, const char *name, double value);

/**
 * Sets the time grid: `n_samples` points on `[0, t_end]`.
 *
 * # Safety
 * `cfg` must be a live config handle.
 */
NvdissStatus nvdiss_config_set_time(NvdissConfig *cfg, double t_end, size_t n_samples);

/**
 * Sets the trajectory count and seed used by the MCWF solver.
 *
 * # Safety
 * `cfg` must be a live config handle.
 */
NvdissStatus nvdiss_config_set_trajectories(NvdissConfig *cfg, size_t n_traj, uint64_t seed);

/**
 * Runs the configured experiment in the calling thread.
 *
 * # Safety
 * `cfg` must be a live config handle; `out` must be a valid pointer.
 */
NvdissStatus nvdiss_run(const NvdissConfig *cfg, NvdissRun **out);

/**
 * Releases a run; null is ignored.
 *
 * # Safety
 * `run` must come from this library and not be used afterwards.
 */
void nvdiss_run_free(NvdissRun *run);

/**
 * Final fidelity to the target state.
 *
 * # Safety
 * `run` must be a live run handle; `out` must be a valid pointer.
 */
NvdissStatus nvdiss_run_final_fidelity(const NvdissRun *run, double *out);

/**
 * Number of time samples (0 for the steady solver).
 *
 * # Safety
 * `run` must be a live run handle; `out` must be a valid pointer.
 */
NvdissStatus nvdiss_run_len(const NvdissRun *run, size_t *out);

/**
 * Copies column `name` (`t`, `F`, `P00`, ..., `n_c`, or `stderr_<col>`)
 * into `buf`, which must hold [`nvdiss_run_len`] values.
 *
 * # Safety
 * `run` must be a live run handle, `name` a NUL-terminated string and `buf`
 * valid for `len` doubles.
 */
NvdissStatus nvdiss_run_column(const NvdissRun *run, const char *name, double *buf, size_t len);

/**
 * Copies the JSON run summary.
 *
 * # Safety
 * `run` must be a live run handle; `buf` valid for `cap` bytes or null;
 * `needed` valid or null.
 */
NvdissStatus nvdiss_run_summary_json(const NvdissRun *run, char *buf, size_t cap, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NVDISS_H */
