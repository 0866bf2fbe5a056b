//! C interface to the `nvdiss` simulator.
//!
//! Configs and results are opaque handles created and released by this
//! library. Every fallible call returns an [`NvdissStatus`]; on failure the
//! message is kept per thread and can be fetched with
//! [`nvdiss_last_error_message`]. Strings passed in must be NUL-terminated
//! UTF-8. Output strings are copied into caller buffers: the required size
//! (including the NUL) is always written to `needed`, and
//! `NVDISS_STATUS_BUFFER_TOO_SMALL` is returned when `cap` is insufficient.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nvdiss::config::{preset_config, ConfigFile, ExperimentConfig};
use nvdiss::runner::{simulate, RunResult};
use nvdiss::Error;

/// Result codes. The positive values match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NvdissStatus {
    Ok = 0,
    InvalidConfig = 2,
    SolverFailure = 3,
    InvariantViolation = 4,
    NullPointer = 10,
    InvalidUtf8 = 11,
    BufferTooSmall = 12,
    NotFound = 13,
    Panic = 14,
}

/// Opaque experiment description.
pub struct NvdissConfig {
    inner: ExperimentConfig,
}

/// Opaque result of a completed run.
pub struct NvdissRun {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn from_error(e: Error) -> NvdissStatus {
    let status = match e.exit_code() {
        3 => NvdissStatus::SolverFailure,
        4 => NvdissStatus::InvariantViolation,
        _ => NvdissStatus::InvalidConfig,
    };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> NvdissStatus) -> NvdissStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside nvdiss");
            NvdissStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, NvdissStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(NvdissStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        NvdissStatus::InvalidUtf8
    })
}

unsafe fn copy_out(text: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> NvdissStatus {
    let n = text.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || cap < n {
        return NvdissStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    NvdissStatus::Ok
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nvdiss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's most recent error message.
///
/// # Safety
/// `buf` must be valid for `cap` bytes or null; `needed` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_last_error_message(buf: *mut c_char, cap: usize, needed: *mut usize) -> NvdissStatus {
    LAST_ERROR.with(|e| copy_out(&e.borrow(), buf, cap, needed))
}

/// Creates a config from an experiment or parameter preset name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_config_from_preset(name: *const c_char, out: *mut *mut NvdissConfig) -> NvdissStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return NvdissStatus::NullPointer;
        }
        let name = try_status!(read_str(name));
        match preset_config(name).and_then(|c| c.validate().map(|_| c)) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(NvdissConfig { inner: c }));
                NvdissStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Creates a config from TOML text in the command-line config format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_config_from_toml(text: *const c_char, out: *mut *mut NvdissConfig) -> NvdissStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return NvdissStatus::NullPointer;
        }
        let text = try_status!(read_str(text));
        match ConfigFile::parse(text).and_then(ConfigFile::resolve) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(NvdissConfig { inner: c }));
                NvdissStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a config; null is ignored.
///
/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_config_free(cfg: *mut NvdissConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn config_mut<'a>(cfg: *mut NvdissConfig) -> Result<&'a mut ExperimentConfig, NvdissStatus> {
    cfg.as_mut().map(|c| &mut c.inner).ok_or_else(|| {
        set_error("null config handle");
        NvdissStatus::NullPointer
    })
}

/// Sets a real system parameter by name (`gamma_phi`, `kappa`, `omega2`, ...).
///
/// # Safety
/// `cfg` must be a live config handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_config_set_param(cfg: *mut NvdissConfig, name: *const c_char, value: f64) -> NvdissStatus {
    guard(|| {
        let c = try_status!(config_mut(cfg));
        let name = try_status!(read_str(name));
        let mut params = c.params.clone();
        if let Err(e) = params.set_by_name(name, value).and_then(|_| params.validate()) {
            return from_error(e);
        }
        c.params = params;
        NvdissStatus::Ok
    })
}

/// Sets the time grid: `n_samples` points on `[0, t_end]`.
///
/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_config_set_time(cfg: *mut NvdissConfig, t_end: f64, n_samples: usize) -> NvdissStatus {
    guard(|| {
        let c = try_status!(config_mut(cfg));
        let mut next = c.clone();
        next.t_end = t_end;
        next.n_samples = n_samples;
        if let Err(e) = next.validate() {
            return from_error(e);
        }
        *c = next;
        NvdissStatus::Ok
    })
}

/// Sets the trajectory count and seed used by the MCWF solver.
///
/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_config_set_trajectories(cfg: *mut NvdissConfig, n_traj: usize, seed: u64) -> NvdissStatus {
    guard(|| {
        let c = try_status!(config_mut(cfg));
        let mut next = c.clone();
        next.n_traj = n_traj;
        next.seed = seed;
        if let Err(e) = next.validate() {
            return from_error(e);
        }
        *c = next;
        NvdissStatus::Ok
    })
}

/// Runs the configured experiment in the calling thread.
///
/// # Safety
/// `cfg` must be a live config handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_run(cfg: *const NvdissConfig, out: *mut *mut NvdissRun) -> NvdissStatus {
    guard(|| {
        let Some(c) = cfg.as_ref() else {
            set_error("null config handle");
            return NvdissStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer");
            return NvdissStatus::NullPointer;
        }
        match simulate(&c.inner) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(NvdissRun { inner: r }));
                NvdissStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a run; null is ignored.
///
/// # Safety
/// `run` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_run_free(run: *mut NvdissRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

unsafe fn run_ref<'a>(run: *const NvdissRun) -> Result<&'a RunResult, NvdissStatus> {
    run.as_ref().map(|r| &r.inner).ok_or_else(|| {
        set_error("null run handle");
        NvdissStatus::NullPointer
    })
}

/// Final fidelity to the target state.
///
/// # Safety
/// `run` must be a live run handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_run_final_fidelity(run: *const NvdissRun, out: *mut f64) -> NvdissStatus {
    let r = try_status!(run_ref(run));
    if out.is_null() {
        set_error("null output pointer");
        return NvdissStatus::NullPointer;
    }
    *out = r.summary.final_fidelity;
    NvdissStatus::Ok
}

/// Number of time samples (0 for the steady solver).
///
/// # Safety
/// `run` must be a live run handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_run_len(run: *const NvdissRun, out: *mut usize) -> NvdissStatus {
    let r = try_status!(run_ref(run));
    if out.is_null() {
        set_error("null output pointer");
        return NvdissStatus::NullPointer;
    }
    *out = r.series.as_ref().map_or(0, |s| s.len());
    NvdissStatus::Ok
}

/// Copies column `name` (`t`, `F`, `P00`, ..., `n_c`, or `stderr_<col>`)
/// into `buf`, which must hold [`nvdiss_run_len`] values.
///
/// # Safety
/// `run` must be a live run handle, `name` a NUL-terminated string and `buf`
/// valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_run_column(
    run: *const NvdissRun,
    name: *const c_char,
    buf: *mut f64,
    len: usize,
) -> NvdissStatus {
    guard(|| {
        let r = try_status!(run_ref(run));
        let name = try_status!(read_str(name));
        let Some(s) = r.series.as_ref() else {
            set_error("run has no time series");
            return NvdissStatus::NotFound;
        };
        let col = match name {
            "t" => Some(s.times.as_slice()),
            _ => match name.strip_prefix("stderr_") {
                Some(base) => s.stderr_of(base),
                None => s.get(name),
            },
        };
        let Some(col) = col else {
            set_error(format!("no column `{name}`"));
            return NvdissStatus::NotFound;
        };
        if buf.is_null() {
            set_error("null output buffer");
            return NvdissStatus::NullPointer;
        }
        if len < col.len() {
            set_error(format!("buffer holds {len} values, need {}", col.len()));
            return NvdissStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(col.as_ptr(), buf, col.len());
        NvdissStatus::Ok
    })
}

/// Copies the JSON run summary.
///
/// # Safety
/// `run` must be a live run handle; `buf` valid for `cap` bytes or null;
/// `needed` valid or null.
#[no_mangle]
pub unsafe extern "C" fn nvdiss_run_summary_json(
    run: *const NvdissRun,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> NvdissStatus {
    guard(|| {
        let r = try_status!(run_ref(run));
        match serde_json::to_string(&r.summary) {
            Ok(text) => copy_out(&text, buf, cap, needed),
            Err(e) => from_error(e.into()),
        }
    })
}
