//! C ABI over the laboratory: opaque handles, integer status codes, and a
//! thread-local last-error message. All pointers returned by this library
//! must be released with the matching `_free` function.

use libc::c_char;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use torus2micro::experiments::report::Report;
use torus2micro::experiments::{self, ExperimentConfig};

/// Status codes returned by every fallible entry point.
pub const T2M_OK: i32 = 0;
pub const T2M_NULL_POINTER: i32 = 1;
pub const T2M_INVALID_ARGUMENT: i32 = 2;
pub const T2M_RUNTIME_ERROR: i32 = 3;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

/// Message of the most recent error on this thread. Borrowed pointer, valid
/// until the next failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn t2m_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Opaque parsed experiment configuration.
pub struct T2mConfig(ExperimentConfig);

/// Opaque experiment report.
pub struct T2mReport(Report);

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, i32> {
    if ptr.is_null() {
        set_error("null string pointer");
        return Err(T2M_NULL_POINTER);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        T2M_INVALID_ARGUMENT
    })
}

/// Parses a `key = value` configuration text into an opaque handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn t2m_config_parse(
    text: *const c_char,
    out: *mut *mut T2mConfig,
) -> i32 {
    if out.is_null() {
        set_error("null output pointer");
        return T2M_NULL_POINTER;
    }
    let text = match read_str(text) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match ExperimentConfig::parse(text) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(T2mConfig(cfg)));
            T2M_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            T2M_INVALID_ARGUMENT
        }
    }
}

/// Releases a configuration handle. Null is ignored.
///
/// # Safety
/// `cfg` must come from `t2m_config_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn t2m_config_free(cfg: *mut T2mConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the named experiment ("identities", "regimes", "infinity",
/// "quasimode" or "projection") and hands back an opaque report.
///
/// # Safety
/// `cfg` must be a live handle, `name` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn t2m_run_experiment(
    cfg: *const T2mConfig,
    name: *const c_char,
    out: *mut *mut T2mReport,
) -> i32 {
    if cfg.is_null() || out.is_null() {
        set_error("null handle");
        return T2M_NULL_POINTER;
    }
    let name = match read_str(name) {
        Ok(n) => n,
        Err(code) => return code,
    };
    let runner = match name {
        "identities" => experiments::run_identities,
        "regimes" => experiments::run_regimes,
        "infinity" => experiments::run_infinity,
        "quasimode" => experiments::run_quasimode,
        "projection" => experiments::run_projection,
        _ => {
            set_error("unknown experiment name");
            return T2M_INVALID_ARGUMENT;
        }
    };
    match runner(&(*cfg).0) {
        Ok(report) => {
            *out = Box::into_raw(Box::new(T2mReport(report)));
            T2M_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            T2M_RUNTIME_ERROR
        }
    }
}

/// 1 if every verdict of the report passed, 0 otherwise (or on null).
///
/// # Safety
/// `report` must be a live handle from `t2m_run_experiment`.
#[no_mangle]
pub unsafe extern "C" fn t2m_report_passed(report: *const T2mReport) -> i32 {
    if report.is_null() {
        return 0;
    }
    (*report).0.passed as i32
}

/// Number of verdicts recorded in the report (0 on null).
///
/// # Safety
/// `report` must be a live handle from `t2m_run_experiment`.
#[no_mangle]
pub unsafe extern "C" fn t2m_report_verdict_count(report: *const T2mReport) -> u64 {
    if report.is_null() {
        return 0;
    }
    (*report).0.verdicts.len() as u64
}

/// Serializes the report (verdicts, regime table, diagnostics, rows) as a
/// JSON string owned by the caller; release with `t2m_string_free`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn t2m_report_to_json(
    report: *const T2mReport,
    out: *mut *mut c_char,
) -> i32 {
    if report.is_null() || out.is_null() {
        set_error("null handle");
        return T2M_NULL_POINTER;
    }
    match serde_json::to_string(&(*report).0) {
        Ok(json) => match CString::new(json) {
            Ok(s) => {
                *out = s.into_raw();
                T2M_OK
            }
            Err(_) => {
                set_error("report JSON contains NUL");
                T2M_RUNTIME_ERROR
            }
        },
        Err(e) => {
            set_error(&e.to_string());
            T2M_RUNTIME_ERROR
        }
    }
}

/// Writes `report.json` and the per-observable CSV files into `dir`.
///
/// # Safety
/// `report` must be a live handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn t2m_report_write(
    report: *const T2mReport,
    dir: *const c_char,
) -> i32 {
    if report.is_null() {
        set_error("null handle");
        return T2M_NULL_POINTER;
    }
    let dir = match read_str(dir) {
        Ok(d) => d,
        Err(code) => return code,
    };
    match (*report).0.write(std::path::Path::new(dir)) {
        Ok(()) => T2M_OK,
        Err(e) => {
            set_error(&e.to_string());
            T2M_RUNTIME_ERROR
        }
    }
}

/// Releases a report handle. Null is ignored.
///
/// # Safety
/// `report` must come from `t2m_run_experiment` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn t2m_report_free(report: *mut T2mReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string produced by this library. Null is ignored.
///
/// # Safety
/// `s` must come from `t2m_report_to_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn t2m_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// One-shot convenience: the real part of the averaged mode-`n` measurement
/// of a coherent wave packet, without exposing state handles. `lattice` and
/// `x0`/`xi0` are length-2 arrays.
///
/// # Safety
/// All array pointers must reference at least two elements; `out_re` and
/// `out_im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn t2m_packet_mode_pairing(
    hbar: f64,
    box_n: i32,
    lattice: *const i64,
    x0: *const f64,
    xi0: *const f64,
    n: i64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> i32 {
    if lattice.is_null() || x0.is_null() || xi0.is_null() || out_re.is_null() || out_im.is_null() {
        set_error("null array pointer");
        return T2M_NULL_POINTER;
    }
    let run = || -> torus2micro::Result<torus2micro::C64> {
        let lat = torus2micro::lattice::PrimitiveLattice::new([*lattice, *lattice.add(1)])?;
        let box_ = torus2micro::weyl::FreqBox::new(box_n);
        let psi = torus2micro::quantum::wave_packet(
            box_,
            hbar,
            [*x0, *x0.add(1)],
            [*xi0, *xi0.add(1)],
        )?;
        let g = lat.generator();
        let obs = torus2micro::wigner::fourier_mode_observable(&lat, [n * g[0], n * g[1]])?;
        torus2micro::wigner::wigner_pairing(&psi, &obs)
    };
    match run() {
        Ok(v) => {
            *out_re = v.re;
            *out_im = v.im;
            T2M_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            T2M_RUNTIME_ERROR
        }
    }
}
