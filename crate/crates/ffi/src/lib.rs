//! C ABI over the `tsrk` solvers.
//!
//! Objects are opaque handles created by `*_new`/`tsrk_solve` and released
//! with the matching `*_free`. Every fallible call returns a [`TsrkStatus`];
//! on failure `tsrk_last_error_message` describes the error for the calling
//! thread. Matrices are row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use tsrk::bounds::{d_factor, RateFactors};
use tsrk::matrix::{coherence, condition_stats, standardize, DenseMatrix};
use tsrk::solvers::{solve, Method, SolveOptions, StoppingRule};
use tsrk::{Error, SolveTrace, StandardizedSystem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsrkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    ZeroRow = 5,
    RankDeficient = 6,
    DegeneratePair = 7,
    NoUsablePair = 8,
    IndexOutOfRange = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsrkMethod {
    Cyclic = 0,
    Randomized = 1,
    TwoSubspace = 2,
}

impl From<TsrkMethod> for Method {
    fn from(m: TsrkMethod) -> Self {
        match m {
            TsrkMethod::Cyclic => Method::Cyclic,
            TsrkMethod::Randomized => Method::Randomized,
            TsrkMethod::TwoSubspace => Method::TwoSubspace,
        }
    }
}

/// Standardized system (unit-norm rows, scaled right-hand side).
pub struct TsrkSystem(StandardizedSystem);

/// Result of a solve: per-iteration records and the final iterate.
pub struct TsrkTrace(SolveTrace);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsrkCoherence {
    pub delta: f64,
    pub big_delta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsrkCondition {
    pub frob_sq: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub scaled_condition: f64,
}

/// `q` and `eta_improved` are NaN when the row-difference matrix is rank
/// deficient.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsrkRateFactors {
    pub delta: f64,
    pub big_delta: f64,
    pub r: f64,
    pub d: f64,
    pub e: f64,
    pub q: f64,
    pub eta: f64,
    pub eta_improved: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TsrkSolveOptions {
    pub method: TsrkMethod,
    pub max_iterations: usize,
    pub seed: u64,
    /// Non-zero enables the sign-adjusted two-subspace step.
    pub sign_adjust: i32,
    /// Negative disables the residual stopping rule.
    pub residual_threshold: f64,
    /// Optional starting iterate of length n (NULL for zeros).
    pub x0: *const f64,
    /// Optional known solution of length n (NULL to skip error tracking).
    pub x_true: *const f64,
}

/// One trace entry. `error` is NaN when no solution was supplied.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TsrkTraceRecord {
    pub k: usize,
    pub row_touches: usize,
    pub error: f64,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> TsrkStatus {
    match e {
        Error::ZeroRow(_) => TsrkStatus::ZeroRow,
        Error::DimensionMismatch(_) | Error::TooFewRows { .. } | Error::Underdetermined { .. } => {
            TsrkStatus::DimensionMismatch
        }
        Error::NonFinite { .. } => TsrkStatus::NonFinite,
        Error::RankDeficient { .. } => TsrkStatus::RankDeficient,
        Error::DegeneratePair { .. } => TsrkStatus::DegeneratePair,
        Error::NoUsablePair => TsrkStatus::NoUsablePair,
        Error::IndexOutOfRange { .. } => TsrkStatus::IndexOutOfRange,
        _ => TsrkStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (TsrkStatus, String)>) -> TsrkStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TsrkStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TsrkStatus::Panic
        }
    }
}

fn lib<T>(r: tsrk::Result<T>) -> Result<T, (TsrkStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TsrkStatus, String) {
    (TsrkStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn system_ref<'a>(
    sys: *const TsrkSystem,
) -> Result<&'a StandardizedSystem, (TsrkStatus, String)> {
    sys.as_ref().map(|s| &s.0).ok_or_else(|| null("system"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tsrk_version() -> *const c_char {
    static V: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    V.as_ptr()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn tsrk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Standardizes the `m x n` row-major matrix `a` with right-hand side `b`
/// (length `m`) and stores a new handle in `*out`.
///
/// # Safety
/// `a` must point to `m * n` doubles, `b` to `m` doubles, `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tsrk_system_new(
    a: *const f64,
    m: usize,
    n: usize,
    b: *const f64,
    out: *mut *mut TsrkSystem,
) -> TsrkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if a.is_null() || b.is_null() {
            return Err(null("matrix or right-hand side"));
        }
        let len = m
            .checked_mul(n)
            .ok_or((TsrkStatus::InvalidArgument, "m * n overflows".into()))?;
        let data = slice::from_raw_parts(a, len).to_vec();
        let rhs = slice::from_raw_parts(b, m);
        let mat = lib(DenseMatrix::new(m, n, data))?;
        let sys = lib(standardize(&mat, rhs))?;
        *out = Box::into_raw(Box::new(TsrkSystem(sys)));
        Ok(())
    })
}

/// Releases a system. NULL is ignored.
///
/// # Safety
/// `sys` must come from [`tsrk_system_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tsrk_system_free(sys: *mut TsrkSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle; `m` and `n` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn tsrk_system_dims(
    sys: *const TsrkSystem,
    m: *mut usize,
    n: *mut usize,
) -> TsrkStatus {
    guard(|| {
        let s = system_ref(sys)?;
        if !m.is_null() {
            *m = s.rows();
        }
        if !n.is_null() {
            *n = s.cols();
        }
        Ok(())
    })
}

/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tsrk_coherence(
    sys: *const TsrkSystem,
    out: *mut TsrkCoherence,
) -> TsrkStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = lib(coherence(s))?;
        *out = TsrkCoherence {
            delta: c.delta,
            big_delta: c.big_delta,
        };
        Ok(())
    })
}

/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tsrk_condition(
    sys: *const TsrkSystem,
    out: *mut TsrkCondition,
) -> TsrkStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = lib(condition_stats(s.matrix()))?;
        *out = TsrkCondition {
            frob_sq: c.frob_sq,
            sigma_min: c.sigma_min,
            sigma_max: c.sigma_max,
            scaled_condition: c.scaled_condition,
        };
        Ok(())
    })
}

/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tsrk_rate_factors(
    sys: *const TsrkSystem,
    out: *mut TsrkRateFactors,
) -> TsrkStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let f = lib(RateFactors::measure(s))?;
        *out = TsrkRateFactors {
            delta: f.delta,
            big_delta: f.big_delta,
            r: f.r,
            d: f.d,
            e: f.e,
            q: f.q,
            eta: f.eta,
            eta_improved: f.eta_improved,
        };
        Ok(())
    })
}

/// Coherence gain `D` for `0 <= delta <= big_delta <= 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsrk_d_factor(delta: f64, big_delta: f64, out: *mut f64) -> TsrkStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(d_factor(delta, big_delta))?;
        Ok(())
    })
}

/// Runs a solver and stores the trace handle in `*out`.
///
/// # Safety
/// `sys` must be a live handle, `opts` readable, `out` writable. Non-NULL
/// `opts->x0` and `opts->x_true` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn tsrk_solve(
    sys: *const TsrkSystem,
    opts: *const TsrkSolveOptions,
    out: *mut *mut TsrkTrace,
) -> TsrkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let s = system_ref(sys)?;
        let o = opts.as_ref().ok_or_else(|| null("options"))?;
        let n = s.cols();
        let vec_of = |p: *const f64| (!p.is_null()).then(|| slice::from_raw_parts(p, n).to_vec());
        let options = SolveOptions {
            method: o.method.into(),
            stop: StoppingRule {
                max_iterations: o.max_iterations,
                residual_threshold: (o.residual_threshold >= 0.0).then_some(o.residual_threshold),
            },
            seed: o.seed,
            sign_adjust: o.sign_adjust != 0,
            x0: vec_of(o.x0),
            x_true: vec_of(o.x_true),
        };
        let trace = lib(solve(s, &options))?;
        *out = Box::into_raw(Box::new(TsrkTrace(trace)));
        Ok(())
    })
}

/// Number of records (iterations + 1); 0 for NULL.
///
/// # Safety
/// `trace` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tsrk_trace_len(trace: *const TsrkTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.records.len())
}

/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tsrk_trace_record(
    trace: *const TsrkTrace,
    index: usize,
    out: *mut TsrkTraceRecord,
) -> TsrkStatus {
    guard(|| {
        let t = trace.as_ref().ok_or_else(|| null("trace"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = t.0.records.get(index).ok_or_else(|| {
            (
                TsrkStatus::IndexOutOfRange,
                format!(
                    "record {index} out of range for {} records",
                    t.0.records.len()
                ),
            )
        })?;
        *out = TsrkTraceRecord {
            k: r.k,
            row_touches: r.row_touches,
            error: r.error.unwrap_or(f64::NAN),
            residual: r.residual,
        };
        Ok(())
    })
}

/// Copies the final iterate into `x`, which must hold `len == n` doubles.
///
/// # Safety
/// `trace` must be a live handle and `x` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tsrk_trace_solution(
    trace: *const TsrkTrace,
    x: *mut f64,
    len: usize,
) -> TsrkStatus {
    guard(|| {
        let t = trace.as_ref().ok_or_else(|| null("trace"))?;
        if x.is_null() {
            return Err(null("x"));
        }
        let sol = &t.0.solution;
        if len != sol.len() {
            return Err((
                TsrkStatus::DimensionMismatch,
                format!("buffer holds {len} values, solution has {}", sol.len()),
            ));
        }
        slice::from_raw_parts_mut(x, len).copy_from_slice(sol);
        Ok(())
    })
}

/// Releases a trace. NULL is ignored.
///
/// # Safety
/// `trace` must come from [`tsrk_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tsrk_trace_free(trace: *mut TsrkTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}
