//! C ABI over the benchmark runner: opaque handles, integer error
//! codes, and a thread-local error message. The header is generated
//! with cbindgen (see `cbindgen.toml` and `include/demnet.h`).
//!
//! Usage pattern from C:
//! ```c
//! DemnetRun *run = NULL;
//! if (demnet_run_toml("problem = \"phasefield_1d\"", &run) != DEMNET_OK) {
//!     fprintf(stderr, "%s\n", demnet_last_error());
//!     return 1;
//! }
//! char *json = NULL;
//! demnet_run_summary_json(run, &json);
//! puts(json);
//! demnet_string_free(json);
//! demnet_run_free(run);
//! ```

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use demnet::cli::{self, RunConfig, RunOutput};

/// Success.
pub const DEMNET_OK: i32 = 0;
/// A pointer argument was null or a string was not valid UTF-8.
pub const DEMNET_EINVAL: i32 = 1;
/// The configuration was rejected.
pub const DEMNET_ECONFIG: i32 = 2;
/// Training failed (non-finite loss).
pub const DEMNET_ETRAINING: i32 = 3;
/// A file could not be written.
pub const DEMNET_EIO: i32 = 4;
/// The requested metric does not exist.
pub const DEMNET_ENOTFOUND: i32 = 5;
/// The callee panicked; the handle state is unchanged.
pub const DEMNET_EPANIC: i32 = 6;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn error_code(e: &cli::CliError) -> i32 {
    set_error(&e.message);
    match e.kind.as_str() {
        "config" => DEMNET_ECONFIG,
        "training" => DEMNET_ETRAINING,
        "io" => DEMNET_EIO,
        _ => DEMNET_EINVAL,
    }
}

/// A completed benchmark run (opaque).
pub struct DemnetRun {
    output: RunOutput,
}

fn catch<R>(f: impl FnOnce() -> Result<R, i32> + std::panic::UnwindSafe) -> Result<R, i32> {
    match std::panic::catch_unwind(f) {
        Ok(r) => r,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in demnet".into());
            set_error(&msg);
            Err(DEMNET_EPANIC)
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, i32> {
    if s.is_null() {
        set_error("null string argument");
        return Err(DEMNET_EINVAL);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        DEMNET_EINVAL
    })
}

/// Returns the message for the most recent error on this thread. The
/// pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn demnet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string; do not free it.
#[no_mangle]
pub extern "C" fn demnet_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Parses a TOML run configuration, trains the selected benchmark to
/// completion (this blocks, possibly for minutes), and stores the
/// result in a new handle written to `out`. On failure `*out` is null.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn demnet_run_toml(toml: *const c_char, out: *mut *mut DemnetRun) -> i32 {
    if out.is_null() {
        set_error("null output argument");
        return DEMNET_EINVAL;
    }
    *out = ptr::null_mut();
    let toml = match read_str(toml) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let result = catch(|| {
        let cfg = RunConfig::from_toml_str(toml).map_err(|e| error_code(&e))?;
        let output = cli::run(&cfg).map_err(|e| error_code(&e))?;
        Ok(Box::into_raw(Box::new(DemnetRun { output })))
    });
    match result {
        Ok(handle) => {
            *out = handle;
            DEMNET_OK
        }
        Err(code) => code,
    }
}

/// Releases a handle. Passing null is a no-op.
///
/// # Safety
/// `run` must come from `demnet_run_toml` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn demnet_run_free(run: *mut DemnetRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Final loss value of the run; NaN if `run` is null.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn demnet_run_loss(run: *const DemnetRun) -> f64 {
    match run.as_ref() {
        Some(r) => r.output.summary.loss,
        None => f64::NAN,
    }
}

/// Wall-clock training time in seconds; NaN if `run` is null.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn demnet_run_wall_secs(run: *const DemnetRun) -> f64 {
    match run.as_ref() {
        Some(r) => r.output.summary.wall_secs,
        None => f64::NAN,
    }
}

/// Looks up a named scalar result: first among the relative L2 errors
/// (e.g. "u", "w", "phi"), then among the probes (e.g.
/// "probe_deflection", "tip_deflection", "u_l2_norm").
///
/// # Safety
/// All pointers must be valid; `name` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn demnet_run_metric(
    run: *const DemnetRun,
    name: *const c_char,
    value: *mut f64,
) -> i32 {
    let (Some(r), false) = (run.as_ref(), value.is_null()) else {
        set_error("null argument");
        return DEMNET_EINVAL;
    };
    let name = match read_str(name) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let s = &r.output.summary;
    let found = s
        .rel_l2
        .iter()
        .chain(s.probes.iter())
        .find(|(k, _)| k == name);
    match found {
        Some((_, v)) => {
            *value = *v;
            DEMNET_OK
        }
        None => {
            set_error(&format!("no metric named `{name}`"));
            DEMNET_ENOTFOUND
        }
    }
}

/// Returns the run summary as a JSON string in `*json`; free it with
/// `demnet_string_free`.
///
/// # Safety
/// `run` must be a live handle and `json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn demnet_run_summary_json(
    run: *const DemnetRun,
    json: *mut *mut c_char,
) -> i32 {
    let (Some(r), false) = (run.as_ref(), json.is_null()) else {
        set_error("null argument");
        return DEMNET_EINVAL;
    };
    let s = serde_json::to_string_pretty(&r.output.summary).unwrap();
    *json = CString::new(s).unwrap().into_raw();
    DEMNET_OK
}

/// Writes summary.json, field.csv, and loss_history.csv into `dir`
/// (created if missing).
///
/// # Safety
/// `run` must be a live handle; `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn demnet_run_write_artifacts(
    run: *const DemnetRun,
    dir: *const c_char,
) -> i32 {
    let Some(r) = run.as_ref() else {
        set_error("null run handle");
        return DEMNET_EINVAL;
    };
    let dir = match read_str(dir) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match cli::write_artifacts(Path::new(dir), &r.output) {
        Ok(()) => DEMNET_OK,
        Err(e) => error_code(&e),
    }
}

/// Frees a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn demnet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
