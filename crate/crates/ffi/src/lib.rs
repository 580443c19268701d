//! C ABI over the dwshell library.
//!
//! Objects are opaque handles created by `*_new`/analysis calls and released with the
//! matching `*_free`. Every fallible call returns a `DwStatus`; on failure
//! `dw_last_error_message` describes the most recent error on the calling thread.
//! Matrices are passed as row-major arrays, complex entries as interleaved (re, im) pairs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dwshell::error::DwError;
use dwshell::graphs::theta_srg_phases;
use dwshell::linalg::{c64, ComplexMatrix, C64};
use dwshell::separation::{check_condition, ConditionId, SeparationVerdict, Status};
use dwshell::shell::{dw_boundary, inverse_dw_boundary};
use dwshell::stability::{
    nyquist_eigenloci, stability_dw, stability_gain_phase, stability_theta_srg, FrequencyGrid, NyquistReport, Overall, RMat, StabilityReport, StateSpaceSystem,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Unstable = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Verdict of a single separation condition.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DwVerdictStatus {
    Separated = 0,
    Intersecting = 1,
    Undecided = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DwOverall {
    Certified = 0,
    NotCertified = 1,
    Counterexample = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DwMethod {
    Dw = 0,
    ThetaSrg = 1,
    GainPhase = 2,
}

pub struct DwMatrix {
    inner: ComplexMatrix,
}

pub struct DwSystem {
    inner: StateSpaceSystem,
}

pub struct DwVerdict {
    inner: SeparationVerdict,
}

pub struct DwStabilityReport {
    inner: StabilityReport,
}

pub struct DwNyquistReport {
    inner: NyquistReport,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &DwError) -> DwStatus {
    match e {
        DwError::NotSquare { .. } | DwError::DimMismatch(..) => DwStatus::DimensionMismatch,
        DwError::NonFinite | DwError::NotHermitian(_) | DwError::InvalidArgument(_) => DwStatus::InvalidArgument,
        DwError::Unstable(_) => DwStatus::Unstable,
        _ => DwStatus::Numeric,
    }
}

struct Fail(DwStatus, String);

impl From<DwError> for Fail {
    fn from(e: DwError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DwStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            DwStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            DwStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Copies `data` into a caller buffer of `cap` elements; `written` always receives the full length.
unsafe fn fill(data: &[f64], buf: *mut f64, cap: usize, written: *mut usize) -> Result<(), Fail> {
    out(written, data.len(), "written")?;
    if data.len() > cap {
        return Err(Fail(DwStatus::BufferTooSmall, format!("buffer holds {cap} values, {} needed", data.len())));
    }
    if !data.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    }
    Ok(())
}

/// Copies a NUL-terminated string; `needed` receives the byte length including the terminator.
unsafe fn fill_str(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Fail> {
    let bytes = s.as_bytes();
    out(needed, bytes.len() + 1, "needed")?;
    if bytes.len() + 1 > cap {
        return Err(Fail(DwStatus::BufferTooSmall, format!("buffer holds {cap} bytes, {} needed", bytes.len() + 1)));
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
    *buf.add(bytes.len()) = 0;
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(p))));
    }
}

/// Message of the last failed call on this thread (empty after a success).
/// Copies into `buf` when it is large enough; returns the needed size including the NUL.
#[no_mangle]
pub unsafe extern "C" fn dw_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    let need = msg.len() + 1;
    if !buf.is_null() && cap >= need {
        ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, msg.len());
        *buf.add(msg.len()) = 0;
    }
    need
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// n×n complex matrix from 2n² doubles: row-major, (re, im) interleaved.
#[no_mangle]
pub unsafe extern "C" fn dw_matrix_new(n: usize, re_im: *const f64, out_matrix: *mut *mut DwMatrix) -> DwStatus {
    guard(|| {
        if n == 0 {
            return Err(Fail(DwStatus::InvalidArgument, "dimension must be positive".into()));
        }
        let data = slice(re_im, 2 * n * n, "entries")?;
        let z: Vec<C64> = data.chunks_exact(2).map(|p| c64(p[0], p[1])).collect();
        let m = ComplexMatrix::from_row_major(n, &z)?;
        out(out_matrix, boxed(DwMatrix { inner: m }), "out_matrix")
    })
}

#[no_mangle]
pub unsafe extern "C" fn dw_matrix_free(m: *mut DwMatrix) {
    release(m);
}

/// Dimension of the matrix, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dw_matrix_dim(m: *const DwMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// Boundary point cloud of the DW shell: 3 doubles (Re z, Im z, ν) per point.
#[no_mangle]
pub unsafe extern "C" fn dw_shell_boundary(m: *const DwMatrix, points: usize, buf: *mut f64, cap: usize, written: *mut usize) -> DwStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        let b = dw_boundary(&m.inner, points)?;
        let flat: Vec<f64> = b.points.iter().flat_map(|p| [p.z.re, p.z.im, p.nu]).collect();
        fill(&flat, buf, cap, written)
    })
}

/// Boundary cloud of the inverse shell with ν ≤ nu_cap; `truncated` is set when points were dropped.
#[no_mangle]
pub unsafe extern "C" fn dw_inverse_shell_boundary(
    m: *const DwMatrix,
    points: usize,
    nu_cap: f64,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
    truncated: *mut bool,
) -> DwStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        let b = inverse_dw_boundary(&m.inner, points, nu_cap)?;
        let flat: Vec<f64> = b.points.iter().flat_map(|p| [p.z.re, p.z.im, p.nu]).collect();
        if !truncated.is_null() {
            *truncated = b.truncated;
        }
        fill(&flat, buf, cap, written)
    })
}

/// θ-SRG phase interval [lo, hi] of the matrix about the axis θ.
#[no_mangle]
pub unsafe extern "C" fn dw_theta_srg_phases(m: *const DwMatrix, theta: f64, lo: *mut f64, hi: *mut f64) -> DwStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        let p = theta_srg_phases(&m.inner, theta)?;
        out(lo, p.lo, "lo")?;
        out(hi, p.hi, "hi")
    })
}

// ---------------------------------------------------------------------------
// Separation
// ---------------------------------------------------------------------------

/// Evaluates one condition (snake_case id such as "dw_separation") for I + A·U*·B·U.
#[no_mangle]
pub unsafe extern "C" fn dw_check_condition(
    a: *const DwMatrix,
    b: *const DwMatrix,
    condition: *const c_char,
    resolution: usize,
    out_verdict: *mut *mut DwVerdict,
) -> DwStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        if condition.is_null() {
            return Err(null("condition"));
        }
        let name = CStr::from_ptr(condition).to_str().map_err(|_| Fail(DwStatus::InvalidArgument, "condition is not UTF-8".into()))?;
        let id = ConditionId::parse(name).ok_or_else(|| Fail(DwStatus::InvalidArgument, format!("unknown condition {name:?}")))?;
        let v = check_condition(&a.inner, &b.inner, id, resolution)?;
        out(out_verdict, boxed(DwVerdict { inner: v }), "out_verdict")
    })
}

#[no_mangle]
pub unsafe extern "C" fn dw_verdict_free(v: *mut DwVerdict) {
    release(v);
}

/// Undecided for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dw_verdict_status(v: *const DwVerdict) -> DwVerdictStatus {
    match v.as_ref().map(|v| v.inner.status) {
        Some(Status::Separated) => DwVerdictStatus::Separated,
        Some(Status::Intersecting) => DwVerdictStatus::Intersecting,
        _ => DwVerdictStatus::Undecided,
    }
}

/// True when the tested condition definitely fails.
#[no_mangle]
pub unsafe extern "C" fn dw_verdict_violated(v: *const DwVerdict) -> bool {
    v.as_ref().is_some_and(|v| v.inner.violated)
}

/// Separation margin (may be ±∞); NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dw_verdict_margin(v: *const DwVerdict) -> f64 {
    v.as_ref().map_or(f64::NAN, |v| v.inner.margin)
}

/// Witness θ; returns false (leaving `theta` untouched) when the verdict has none.
#[no_mangle]
pub unsafe extern "C" fn dw_verdict_witness_theta(v: *const DwVerdict, theta: *mut f64) -> bool {
    match v.as_ref().and_then(|v| v.inner.witness_theta) {
        Some(t) if !theta.is_null() => {
            *theta = t;
            true
        }
        _ => false,
    }
}

/// Verdict as JSON.
#[no_mangle]
pub unsafe extern "C" fn dw_verdict_json(v: *const DwVerdict, buf: *mut c_char, cap: usize, needed: *mut usize) -> DwStatus {
    guard(|| {
        let v = handle(v, "verdict")?;
        fill_str(&serde_json::to_string(&v.inner).expect("serializable"), buf, cap, needed)
    })
}

// ---------------------------------------------------------------------------
// Systems and stability
// ---------------------------------------------------------------------------

/// Real state-space system; A is nx×nx, B nx×nu, C ny×nx, D ny×nu, all row-major.
#[no_mangle]
pub unsafe extern "C" fn dw_system_new(
    nx: usize,
    nu: usize,
    ny: usize,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    d: *const f64,
    out_system: *mut *mut DwSystem,
) -> DwStatus {
    guard(|| {
        let mat = |p: *const f64, r: usize, c: usize, what: &str| -> Result<RMat, Fail> { Ok(RMat::from_row_slice(r, c, slice(p, r * c, what)?)) };
        let s = StateSpaceSystem::new(mat(a, nx, nx, "A")?, mat(b, nx, nu, "B")?, mat(c, ny, nx, "C")?, mat(d, ny, nu, "D")?)?;
        out(out_system, boxed(DwSystem { inner: s }), "out_system")
    })
}

#[no_mangle]
pub unsafe extern "C" fn dw_system_free(s: *mut DwSystem) {
    release(s);
}

unsafe fn grid(omegas: *const f64, count: usize, include_infinity: bool) -> Result<FrequencyGrid, Fail> {
    Ok(FrequencyGrid::new(slice(omegas, count, "omegas")?.to_vec(), include_infinity)?)
}

/// Frequencywise stability of the negative feedback of G and H on the given frequencies
/// (strictly increasing, nonnegative), optionally with ω = ∞.
#[no_mangle]
pub unsafe extern "C" fn dw_stability(
    g: *const DwSystem,
    h: *const DwSystem,
    method: DwMethod,
    omegas: *const f64,
    count: usize,
    include_infinity: bool,
    mu_points: usize,
    resolution: usize,
    out_report: *mut *mut DwStabilityReport,
) -> DwStatus {
    guard(|| {
        let (g, h) = (handle(g, "g")?, handle(h, "h")?);
        let grid = grid(omegas, count, include_infinity)?;
        let r = match method {
            DwMethod::Dw => stability_dw(&g.inner, &h.inner, &grid, mu_points)?,
            DwMethod::ThetaSrg => stability_theta_srg(&g.inner, &h.inner, &grid, resolution, mu_points)?,
            DwMethod::GainPhase => stability_gain_phase(&g.inner, &h.inner, &grid)?,
        };
        out(out_report, boxed(DwStabilityReport { inner: r }), "out_report")
    })
}

#[no_mangle]
pub unsafe extern "C" fn dw_stability_report_free(r: *mut DwStabilityReport) {
    release(r);
}

/// NotCertified for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dw_stability_report_overall(r: *const DwStabilityReport) -> DwOverall {
    match r.as_ref().map(|r| r.inner.overall) {
        Some(Overall::Certified) => DwOverall::Certified,
        Some(Overall::Counterexample) => DwOverall::Counterexample,
        _ => DwOverall::NotCertified,
    }
}

/// Number of per-frequency verdicts.
#[no_mangle]
pub unsafe extern "C" fn dw_stability_report_len(r: *const DwStabilityReport) -> usize {
    r.as_ref().map_or(0, |r| r.inner.per_frequency.len())
}

/// Report as JSON.
#[no_mangle]
pub unsafe extern "C" fn dw_stability_report_json(r: *const DwStabilityReport, buf: *mut c_char, cap: usize, needed: *mut usize) -> DwStatus {
    guard(|| {
        let r = handle(r, "report")?;
        fill_str(&serde_json::to_string(&r.inner).expect("serializable"), buf, cap, needed)
    })
}

/// Eigenloci of G(iω)H(iω), their distance to (−∞, −1] and the winding of det(I + GH).
#[no_mangle]
pub unsafe extern "C" fn dw_nyquist(
    g: *const DwSystem,
    h: *const DwSystem,
    omegas: *const f64,
    count: usize,
    include_infinity: bool,
    out_report: *mut *mut DwNyquistReport,
) -> DwStatus {
    guard(|| {
        let (g, h) = (handle(g, "g")?, handle(h, "h")?);
        let r = nyquist_eigenloci(&g.inner, &h.inner, &grid(omegas, count, include_infinity)?)?;
        out(out_report, boxed(DwNyquistReport { inner: r }), "out_report")
    })
}

#[no_mangle]
pub unsafe extern "C" fn dw_nyquist_report_free(r: *mut DwNyquistReport) {
    release(r);
}

#[no_mangle]
pub unsafe extern "C" fn dw_nyquist_min_distance(r: *const DwNyquistReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.inner.min_distance)
}

#[no_mangle]
pub unsafe extern "C" fn dw_nyquist_winding(r: *const DwNyquistReport) -> i64 {
    r.as_ref().map_or(0, |r| r.inner.winding)
}
