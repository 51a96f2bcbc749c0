/* SPDX-License-Identifier: Apache-2.0 */

#ifndef ROBUST_BANDITS_H
#define ROBUST_BANDITS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RbStatus {
  RB_STATUS_OK = 0,
  RB_STATUS_NULL_POINTER = 1,
  RB_STATUS_INVALID_ARGUMENT = 2,
  RB_STATUS_CONFIG = 3,
  RB_STATUS_IO = 4,
  RB_STATUS_RUNTIME = 5,
  // An invariant check failed.
  RB_STATUS_INVARIANT = 6,
  // The value does not exist for this object, e.g. realized regret on a
  // trace recorded without reward vectors.
  RB_STATUS_NOT_AVAILABLE = 7,
  RB_STATUS_BUFFER_TOO_SMALL = 8,
  RB_STATUS_PANIC = 9,
} RbStatus;

// Validated experiment config.
typedef struct RbConfig RbConfig;

// Aggregated results of a replicated experiment.
typedef struct RbReport RbReport;

// One replicate's full trace.
typedef struct RbTrace RbTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message, NUL-terminated and
// truncated to `len` bytes, and returns the full message length.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
uintptr_t rb_last_error_message(char *buf, uintptr_t len);

// Library version as a static NUL-terminated string.
const char *rb_version(void);

// Loads and validates a TOML config file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum RbStatus rb_config_load(const char *path, struct RbConfig **out);

// Parses config text; relative paths inside resolve against `base_dir`
// (null means the current directory).
//
// # Safety
// `text` and `base_dir` (if non-null) must be NUL-terminated strings and
// `out` a valid pointer.
enum RbStatus rb_config_from_toml(const char *text, const char *base_dir, struct RbConfig **out);

// Replaces the seed list with replicates `0..count`.
//
// # Safety
// `config` must be a live handle.
enum RbStatus rb_config_set_seed_count(struct RbConfig *config, uint64_t count);

// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum RbStatus rb_config_arm_count(const struct RbConfig *config, uintptr_t *out);

// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum RbStatus rb_config_horizon(const struct RbConfig *config, uint64_t *out);

// # Safety
// `config` must be null or a handle not yet freed.
void rb_config_free(struct RbConfig *config);

// Runs every seed of the config on `workers` threads (0 = all cores).
//
// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum RbStatus rb_replicate(const struct RbConfig *config, uintptr_t workers, struct RbReport **out);

// Writes `regret.csv`, `epochs.csv` and `summary.json` into `dir`.
//
// # Safety
// `report` must be a live handle and `dir` a NUL-terminated string.
enum RbStatus rb_report_emit(const struct RbReport *report, const char *dir);

// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum RbStatus rb_report_seed_count(const struct RbReport *report, uintptr_t *out);

// # Safety
// `report` must be a live handle, `written` valid, `buf` valid for `len`.
enum RbStatus rb_report_checkpoints(const struct RbReport *report,
                                    uint64_t *buf,
                                    uintptr_t len,
                                    uintptr_t *written);

// Mean pseudo-regret across seeds at each checkpoint.
//
// # Safety
// `report` must be a live handle, `written` valid, `buf` valid for `len`.
enum RbStatus rb_report_mean_pseudo_regret(const struct RbReport *report,
                                           double *buf,
                                           uintptr_t len,
                                           uintptr_t *written);

// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum RbStatus rb_report_mean_final_regret(const struct RbReport *report, double *out);

// Mean realized corruption `C` across seeds.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum RbStatus rb_report_mean_corruption(const struct RbReport *report, double *out);

// Fraction of seeds passing the event-E check; `NotAvailable` for
// players without BARBAR epochs.
//
// # Safety
// `report` must be a live handle and `out` a valid pointer.
enum RbStatus rb_report_event_e_pass_fraction(const struct RbReport *report, double *out);

// # Safety
// `report` must be null or a handle not yet freed.
void rb_report_free(struct RbReport *report);

// Plays replicate `seed` of the config and keeps the full trace.
//
// # Safety
// `config` must be a live handle and `out` a valid pointer.
enum RbStatus rb_run_seed(const struct RbConfig *config, uint64_t seed, struct RbTrace **out);

// # Safety
// `trace` must be a live handle and `out` a valid pointer.
enum RbStatus rb_trace_len(const struct RbTrace *trace, uint64_t *out);

// Chosen arm (0-based) for rounds `1..=T`.
//
// # Safety
// `trace` must be a live handle, `written` valid, `buf` valid for `len`.
enum RbStatus rb_trace_choices(const struct RbTrace *trace,
                               uint32_t *buf,
                               uintptr_t len,
                               uintptr_t *written);

// Final pseudo-regret.
//
// # Safety
// `trace` must be a live handle and `out` a valid pointer.
enum RbStatus rb_trace_pseudo_regret(const struct RbTrace *trace, double *out);

// Realized corruption `C`.
//
// # Safety
// `trace` must be a live handle and `out` a valid pointer.
enum RbStatus rb_trace_corruption(const struct RbTrace *trace, double *out);

// Realized regret on the corrupted rewards; `NotAvailable` if the trace
// was recorded without reward vectors.
//
// # Safety
// `trace` must be a live handle and `out` a valid pointer.
enum RbStatus rb_trace_realized_regret(const struct RbTrace *trace, double *out);

// Evaluates event E against the instance's true means.
//
// # Safety
// `trace` must be a live handle and `passed` a valid pointer.
enum RbStatus rb_trace_check_event_e(const struct RbTrace *trace, bool *passed);

// Epoch-length invariants; returns `Invariant` with a message on violation.
//
// # Safety
// `trace` must be a live handle.
enum RbStatus rb_trace_check_epoch_lengths(const struct RbTrace *trace);

// # Safety
// `trace` must be null or a handle not yet freed.
void rb_trace_free(struct RbTrace *trace);

// Runs the offline invariant suite on a run directory. `Ok` with
// `*passed == false` means a violation was found; details go to the
// last-error message.
//
// # Safety
// `dir` must be a NUL-terminated string and `passed` a valid pointer.
enum RbStatus rb_check_bounds(const char *dir, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUST_BANDITS_H */
