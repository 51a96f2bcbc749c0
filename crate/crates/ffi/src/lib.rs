// SPDX-License-Identifier: Apache-2.0

//! C ABI for `robust-bandits`.
//!
//! Every function returns an [`RbStatus`]. Objects live behind opaque
//! handles created by `rb_config_load`, `rb_config_from_toml`,
//! `rb_replicate` and `rb_run_seed`, and released with the matching
//! `rb_*_free`. After a failure, `rb_last_error_message`
//! describes it; the message is per thread.
//!
//! Array getters follow one convention: pass `buf`/`len`, get the required
//! length in `*written`. A null `buf` with `len == 0` queries the length;
//! a short buffer yields [`RbStatus::BufferTooSmall`] with `*written` set.
//!
//! Handles are not synchronized. A handle may move between threads but must
//! not be used from two threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use robust_bandits::harness::{self, AggregateReport, ExperimentConfig};
use robust_bandits::metrics;
use robust_bandits::stats;
use robust_bandits::{Error, RunTrace};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Runtime = 5,
    /// An invariant check failed.
    Invariant = 6,
    /// The value does not exist for this object, e.g. realized regret on a
    /// trace recorded without reward vectors.
    NotAvailable = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Validated experiment config.
pub struct RbConfig {
    inner: ExperimentConfig,
}

/// Aggregated results of a replicated experiment.
pub struct RbReport {
    inner: AggregateReport,
}

/// One replicate's full trace.
pub struct RbTrace {
    inner: RunTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> RbStatus {
    match err {
        Error::ConfigParse { .. } | Error::ConfigValidation { .. } => RbStatus::Config,
        Error::Io { .. } | Error::Format { .. } => RbStatus::Io,
        Error::InvalidParameter { .. } | Error::InvalidInstance(_) | Error::ArmOutOfRange { .. } => {
            RbStatus::InvalidArgument
        }
        Error::VectorsNotStored | Error::NotEpochTrace(_) => RbStatus::NotAvailable,
        Error::Invariant(_) => RbStatus::Invariant,
        Error::Seed { source, .. } => status_of(source),
    }
}

fn fail(err: Error) -> RbStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Clears the error message, runs `body` and converts panics into
/// [`RbStatus::Panic`].
fn guard(body: impl FnOnce() -> RbStatus) -> RbStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RbStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!(stringify!($p), " is null"));
            return RbStatus::NullPointer;
        })+
    };
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, RbStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        return Err(RbStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        RbStatus::InvalidArgument
    })
}

unsafe fn write_slice<T: Copy>(src: &[T], buf: *mut T, len: usize, written: *mut usize) -> RbStatus {
    non_null!(written);
    *written = src.len();
    if len < src.len() || (buf.is_null() && !src.is_empty()) {
        if buf.is_null() && len == 0 {
            return RbStatus::Ok;
        }
        set_error(format!("buffer holds {len} values, {} needed", src.len()));
        return RbStatus::BufferTooSmall;
    }
    if !src.is_empty() {
        std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    RbStatus::Ok
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads and validates a TOML config file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_config_load(path: *const c_char, out: *mut *mut RbConfig) -> RbStatus {
    guard(|| {
        non_null!(out);
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match harness::load_config(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RbConfig { inner }));
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses config text; relative paths inside resolve against `base_dir`
/// (null means the current directory).
///
/// # Safety
/// `text` and `base_dir` (if non-null) must be NUL-terminated strings and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_config_from_toml(
    text: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut RbConfig,
) -> RbStatus {
    guard(|| {
        non_null!(out);
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let base = if base_dir.is_null() {
            "."
        } else {
            match str_arg(base_dir, "base_dir") {
                Ok(b) => b,
                Err(s) => return s,
            }
        };
        match ExperimentConfig::from_toml_str(text, Path::new(base)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RbConfig { inner }));
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Replaces the seed list with replicates `0..count`.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_config_set_seed_count(config: *mut RbConfig, count: u64) -> RbStatus {
    guard(|| {
        non_null!(config);
        let cfg = &mut (*config).inner;
        match cfg.clone().with_seed_count(count) {
            Ok(c) => {
                *cfg = c;
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_config_arm_count(config: *const RbConfig, out: *mut usize) -> RbStatus {
    guard(|| {
        non_null!(config, out);
        *out = (*config).inner.instance.k();
        RbStatus::Ok
    })
}

/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_config_horizon(config: *const RbConfig, out: *mut u64) -> RbStatus {
    guard(|| {
        non_null!(config, out);
        *out = (*config).inner.horizon;
        RbStatus::Ok
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rb_config_free(config: *mut RbConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs every seed of the config on `workers` threads (0 = all cores).
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_replicate(config: *const RbConfig, workers: usize, out: *mut *mut RbReport) -> RbStatus {
    guard(|| {
        non_null!(config, out);
        match harness::replicate(&(*config).inner, workers) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RbReport { inner }));
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes `regret.csv`, `epochs.csv` and `summary.json` into `dir`.
///
/// # Safety
/// `report` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rb_report_emit(report: *const RbReport, dir: *const c_char) -> RbStatus {
    guard(|| {
        non_null!(report);
        let dir = match str_arg(dir, "dir") {
            Ok(d) => d,
            Err(s) => return s,
        };
        match harness::emit_reports(&(*report).inner, Path::new(dir)) {
            Ok(_) => RbStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_report_seed_count(report: *const RbReport, out: *mut usize) -> RbStatus {
    guard(|| {
        non_null!(report, out);
        *out = (*report).inner.aggregates.seeds;
        RbStatus::Ok
    })
}

/// # Safety
/// `report` must be a live handle, `written` valid, `buf` valid for `len`.
#[no_mangle]
pub unsafe extern "C" fn rb_report_checkpoints(
    report: *const RbReport,
    buf: *mut u64,
    len: usize,
    written: *mut usize,
) -> RbStatus {
    guard(|| {
        non_null!(report);
        write_slice(&(*report).inner.aggregates.checkpoints, buf, len, written)
    })
}

/// Mean pseudo-regret across seeds at each checkpoint.
///
/// # Safety
/// `report` must be a live handle, `written` valid, `buf` valid for `len`.
#[no_mangle]
pub unsafe extern "C" fn rb_report_mean_pseudo_regret(
    report: *const RbReport,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> RbStatus {
    guard(|| {
        non_null!(report);
        write_slice(&(*report).inner.aggregates.mean, buf, len, written)
    })
}

/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_report_mean_final_regret(report: *const RbReport, out: *mut f64) -> RbStatus {
    guard(|| {
        non_null!(report, out);
        *out = (*report).inner.aggregates.mean_final_pseudo_regret;
        RbStatus::Ok
    })
}

/// Mean realized corruption `C` across seeds.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_report_mean_corruption(report: *const RbReport, out: *mut f64) -> RbStatus {
    guard(|| {
        non_null!(report, out);
        *out = (*report).inner.aggregates.mean_realized_c;
        RbStatus::Ok
    })
}

/// Fraction of seeds passing the event-E check; `NotAvailable` for
/// players without BARBAR epochs.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_report_event_e_pass_fraction(report: *const RbReport, out: *mut f64) -> RbStatus {
    guard(|| {
        non_null!(report, out);
        match (*report).inner.aggregates.event_e_pass_fraction {
            Some(f) => {
                *out = f;
                RbStatus::Ok
            }
            None => {
                set_error("player has no BARBAR epochs");
                RbStatus::NotAvailable
            }
        }
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rb_report_free(report: *mut RbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Plays replicate `seed` of the config and keeps the full trace.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_run_seed(config: *const RbConfig, seed: u64, out: *mut *mut RbTrace) -> RbStatus {
    guard(|| {
        non_null!(config, out);
        match harness::run_seed(&(*config).inner, seed) {
            Ok((inner, _)) => {
                *out = Box::into_raw(Box::new(RbTrace { inner }));
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_trace_len(trace: *const RbTrace, out: *mut u64) -> RbStatus {
    guard(|| {
        non_null!(trace, out);
        *out = (*trace).inner.len() as u64;
        RbStatus::Ok
    })
}

/// Chosen arm (0-based) for rounds `1..=T`.
///
/// # Safety
/// `trace` must be a live handle, `written` valid, `buf` valid for `len`.
#[no_mangle]
pub unsafe extern "C" fn rb_trace_choices(
    trace: *const RbTrace,
    buf: *mut u32,
    len: usize,
    written: *mut usize,
) -> RbStatus {
    guard(|| {
        non_null!(trace);
        let choices: Vec<u32> = (*trace).inner.choices().iter().map(|&c| c as u32).collect();
        write_slice(&choices, buf, len, written)
    })
}

/// Final pseudo-regret.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_trace_pseudo_regret(trace: *const RbTrace, out: *mut f64) -> RbStatus {
    guard(|| {
        non_null!(trace, out);
        *out = metrics::pseudo_regret_total(&(*trace).inner);
        RbStatus::Ok
    })
}

/// Realized corruption `C`.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_trace_corruption(trace: *const RbTrace, out: *mut f64) -> RbStatus {
    guard(|| {
        non_null!(trace, out);
        *out = metrics::corruption_level(&(*trace).inner).total;
        RbStatus::Ok
    })
}

/// Realized regret on the corrupted rewards; `NotAvailable` if the trace
/// was recorded without reward vectors.
///
/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_trace_realized_regret(trace: *const RbTrace, out: *mut f64) -> RbStatus {
    guard(|| {
        non_null!(trace, out);
        match metrics::realized_regret(&(*trace).inner) {
            Ok(v) => {
                *out = v;
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Evaluates event E against the instance's true means.
///
/// # Safety
/// `trace` must be a live handle and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_trace_check_event_e(trace: *const RbTrace, passed: *mut bool) -> RbStatus {
    guard(|| {
        non_null!(trace, passed);
        let t = &(*trace).inner;
        match stats::check_event_e(t, t.instance()) {
            Ok(report) => {
                *passed = report.passed;
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Epoch-length invariants; returns `Invariant` with a message on violation.
///
/// # Safety
/// `trace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_trace_check_epoch_lengths(trace: *const RbTrace) -> RbStatus {
    guard(|| {
        non_null!(trace);
        match stats::check_epoch_lengths(&(*trace).inner).and_then(|r| r.into_result()) {
            Ok(_) => RbStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rb_trace_free(trace: *mut RbTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Runs the offline invariant suite on a run directory. `Ok` with
/// `*passed == false` means a violation was found; details go to the
/// last-error message.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_check_bounds(dir: *const c_char, passed: *mut bool) -> RbStatus {
    guard(|| {
        non_null!(passed);
        let dir = match str_arg(dir, "dir") {
            Ok(d) => d,
            Err(s) => return s,
        };
        match harness::check_run_dir(Path::new(dir)) {
            Ok(report) => {
                *passed = report.passed();
                if !report.passed() {
                    set_error(report.violations.join("; "));
                }
                RbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
