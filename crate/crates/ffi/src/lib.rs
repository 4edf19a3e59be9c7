//! C ABI for the analyzer.
//!
//! Handles are opaque and owned by the caller once returned; each has a
//! matching `_free` function. Every fallible call returns a [`ProdintStatus`]
//! and records a message readable through [`prodint_last_error_message`] on
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use prodint::cli::RunOptions;
use prodint::engine::{analyze, oracle_check, Verdict};
use prodint::frontend::ast::Program;
use prodint::frontend::cfg::ObligationKind;
use prodint::frontend::parse;
use prodint::report::{Report, EXIT_ERROR};
use prodint::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProdintStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ConfigError = 4,
    AnalysisError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProdintObligationKind {
    Lower = 0,
    Upper = 1,
    Assert = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProdintVerdict {
    Proved = 0,
    Unknown = 1,
}

/// One obligation verdict, copied out of a result.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProdintObligation {
    pub line: u32,
    pub col: u32,
    pub kind: ProdintObligationKind,
    pub verdict: ProdintVerdict,
}

/// A parsed program.
pub struct ProdintProgram {
    program: Program,
}

/// Analysis settings, set by flag name.
pub struct ProdintConfig {
    options: RunOptions,
}

/// The outcome of one analysis.
pub struct ProdintResult {
    report: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    // Interior NULs cannot cross as C strings; drop them.
    let text: String = msg.into().chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: ProdintStatus, msg: impl Into<String>) -> ProdintStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> ProdintStatus {
    match e {
        Error::Parse { .. } => ProdintStatus::ParseError,
        Error::Config(_) => ProdintStatus::ConfigError,
        _ => ProdintStatus::AnalysisError,
    }
}

/// Runs `f`, turning a panic into [`ProdintStatus::Panic`].
fn guard(f: impl FnOnce() -> ProdintStatus) -> ProdintStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(ProdintStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, ProdintStatus> {
    if p.is_null() {
        return Err(fail(ProdintStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            ProdintStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

/// Parses program text. On success `*out` receives a handle to free with
/// [`prodint_program_free`].
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prodint_program_parse(
    source: *const c_char,
    out: *mut *mut ProdintProgram,
) -> ProdintStatus {
    guard(|| {
        if out.is_null() {
            return fail(ProdintStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(source, "source") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse(text) {
            Ok(program) => {
                *out = Box::into_raw(Box::new(ProdintProgram { program }));
                ProdintStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `p` must come from [`prodint_program_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn prodint_program_free(p: *mut ProdintProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// A configuration with defaults: the interval domain alone.
#[no_mangle]
pub extern "C" fn prodint_config_new() -> *mut ProdintConfig {
    Box::into_raw(Box::new(ProdintConfig {
        options: RunOptions::default(),
    }))
}

/// Sets one option by its command-line flag name without dashes, such as
/// `domains`, `product`, `reductions`, `power-pivot`, `power-exponent`,
/// `power-atoms`, `array-mode` or `widening-delay`.
///
/// # Safety
/// `cfg` must come from [`prodint_config_new`]; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn prodint_config_set(
    cfg: *mut ProdintConfig,
    key: *const c_char,
    value: *const c_char,
) -> ProdintStatus {
    guard(|| {
        if cfg.is_null() {
            return fail(ProdintStatus::NullPointer, "config is null");
        }
        let (key, value) = match (read_str(key, "key"), read_str(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match (*cfg).options.set(key, value) {
            Ok(()) => ProdintStatus::Ok,
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `cfg` must come from [`prodint_config_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn prodint_config_free(cfg: *mut ProdintConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Analyzes a program. With `oracle` set, the result is also checked against
/// the concrete interpreter. On success `*out` receives a handle to free with
/// [`prodint_result_free`].
///
/// # Safety
/// `program` and `cfg` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prodint_analyze(
    program: *const ProdintProgram,
    cfg: *const ProdintConfig,
    oracle: bool,
    out: *mut *mut ProdintResult,
) -> ProdintStatus {
    guard(|| {
        if program.is_null() || cfg.is_null() || out.is_null() {
            return fail(
                ProdintStatus::NullPointer,
                "program, config and out must be non-null",
            );
        }
        *out = ptr::null_mut();
        let config = match (*cfg).options.to_config() {
            Ok(c) => c,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let analysis = match analyze(&(*program).program, &config) {
            Ok(a) => a,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let soundness = oracle.then(|| oracle_check(&analysis));
        let report = Report::new("<memory>", &analysis, soundness.as_ref());
        *out = Box::into_raw(Box::new(ProdintResult { report }));
        ProdintStatus::Ok
    })
}

/// # Safety
/// `r` must be a live result handle or null.
#[no_mangle]
pub unsafe extern "C" fn prodint_result_obligation_count(r: *const ProdintResult) -> usize {
    if r.is_null() {
        return 0;
    }
    (*r).report.obligations.len()
}

/// Copies obligation `index` into `*out`.
///
/// # Safety
/// `r` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn prodint_result_obligation(
    r: *const ProdintResult,
    index: usize,
    out: *mut ProdintObligation,
) -> ProdintStatus {
    guard(|| {
        if r.is_null() || out.is_null() {
            return fail(
                ProdintStatus::NullPointer,
                "result and out must be non-null",
            );
        }
        let obligations = &(*r).report.obligations;
        let Some(o) = obligations.get(index) else {
            return fail(
                ProdintStatus::AnalysisError,
                format!("no obligation at index {index}"),
            );
        };
        let kind = match o.kind {
            k if k == ObligationKind::Lower.name() => ProdintObligationKind::Lower,
            k if k == ObligationKind::Upper.name() => ProdintObligationKind::Upper,
            _ => ProdintObligationKind::Assert,
        };
        let verdict = match o.verdict {
            Verdict::Proved => ProdintVerdict::Proved,
            Verdict::Unknown => ProdintVerdict::Unknown,
        };
        *out = ProdintObligation {
            line: o.line,
            col: o.col,
            kind,
            verdict,
        };
        ProdintStatus::Ok
    })
}

/// The command-line exit code for this result: 0 all proved, 1 some unknown,
/// 3 oracle violation. A null handle gives 2.
///
/// # Safety
/// `r` must be a live result handle or null.
#[no_mangle]
pub unsafe extern "C" fn prodint_result_exit_code(r: *const ProdintResult) -> i32 {
    if r.is_null() {
        return EXIT_ERROR;
    }
    (*r).report.exit_code()
}

/// The JSON report as a new string to free with [`prodint_string_free`];
/// null on failure.
///
/// # Safety
/// `r` must be a live result handle or null.
#[no_mangle]
pub unsafe extern "C" fn prodint_result_to_json(r: *const ProdintResult) -> *mut c_char {
    if r.is_null() {
        set_error("result is null");
        return ptr::null_mut();
    }
    match catch_unwind(AssertUnwindSafe(|| (*r).report.to_json())) {
        Ok(json) => match CString::new(json) {
            Ok(s) => s.into_raw(),
            Err(_) => {
                set_error("report contains a NUL byte");
                ptr::null_mut()
            }
        },
        Err(_) => {
            set_error("internal panic");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `r` must come from [`prodint_analyze`] or be null.
#[no_mangle]
pub unsafe extern "C" fn prodint_result_free(r: *mut ProdintResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn prodint_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn prodint_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
