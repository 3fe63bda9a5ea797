#ifndef DEMNET_H
#define DEMNET_H

/* Generated by cbindgen from the demnet-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define DEMNET_OK 0

/**
 * A pointer argument was null or a string was not valid UTF-8.
 */
#define DEMNET_EINVAL 1

/**
 * The configuration was rejected.
 */
#define DEMNET_ECONFIG 2

/**
 * Training failed (non-finite loss).
 */
#define DEMNET_ETRAINING 3

/**
 * A file could not be written.
 */
#define DEMNET_EIO 4

/**
 * The requested metric does not exist.
 */
#define DEMNET_ENOTFOUND 5

/**
 * The callee panicked; the handle state is unchanged.
 */
#define DEMNET_EPANIC 6

/**
 * A completed benchmark run (opaque).
 */
typedef struct DemnetRun DemnetRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message for the most recent error on this thread. The
 * pointer stays valid until the next failing call on the same thread;
 * do not free it.
 */
const char *demnet_last_error(void);

/**
 * Library version as a static string; do not free it.
 */
const char *demnet_version(void);

/**
 * Parses a TOML run configuration, trains the selected benchmark to
 * completion (this blocks, possibly for minutes), and stores the
 * result in a new handle written to `out`. On failure `*out` is null.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t demnet_run_toml(const char *toml, struct DemnetRun **out);

/**
 * Releases a handle. Passing null is a no-op.
 *
 * # Safety
 * `run` must come from `demnet_run_toml` and not be freed twice.
 */
void demnet_run_free(struct DemnetRun *run);

/**
 * Final loss value of the run; NaN if `run` is null.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
double demnet_run_loss(const struct DemnetRun *run);

/**
 * Wall-clock training time in seconds; NaN if `run` is null.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
double demnet_run_wall_secs(const struct DemnetRun *run);

/**
 * Looks up a named scalar result: first among the relative L2 errors
 * (e.g. "u", "w", "phi"), then among the probes (e.g.
 * "probe_deflection", "tip_deflection", "u_l2_norm").
 *
 * # Safety
 * All pointers must be valid; `name` must be NUL-terminated.
 */
int32_t demnet_run_metric(const struct DemnetRun *run, const char *name, double *value);

/**
 * Returns the run summary as a JSON string in `*json`; free it with
 * `demnet_string_free`.
 *
 * # Safety
 * `run` must be a live handle and `json` a valid pointer.
 */
int32_t demnet_run_summary_json(const struct DemnetRun *run, char **json);

/**
 * Writes summary.json, field.csv, and loss_history.csv into `dir`
 * (created if missing).
 *
 * # Safety
 * `run` must be a live handle; `dir` must be NUL-terminated.
 */
int32_t demnet_run_write_artifacts(const struct DemnetRun *run, const char *dir);

/**
 * Frees a string returned by this library. Passing null is a no-op.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void demnet_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEMNET_H */
