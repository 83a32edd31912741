//! C ABI over the `hdecert` library.
//!
//! Every fallible function returns an [`HdecertStatus`] and writes its
//! result through an out-pointer. On failure the message is kept per thread
//! and can be read with [`hdecert_last_error`]. Objects are opaque handles
//! that must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hdecert::operators::{self, HermitianOperator};
use hdecert::separation::{self, AdversarySet, StrategyId};
use hdecert::spectra::{self, SchmidtSpectrum};
use hdecert::{twoqubit, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdecertStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The adversary set contains states that always pass.
    Infeasible = 3,
    Numerical = 4,
    Panic = 5,
}

/// Strategy selector for [`hdecert_plan`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdecertStrategy {
    Opt = 0,
    Mub = 1,
    SepH = 2,
    LcH = 3,
}

impl From<HdecertStrategy> for StrategyId {
    fn from(s: HdecertStrategy) -> Self {
        match s {
            HdecertStrategy::Opt => StrategyId::Opt,
            HdecertStrategy::Mub => StrategyId::Mub,
            HdecertStrategy::SepH => StrategyId::SepH,
            HdecertStrategy::LcH => StrategyId::LcH,
        }
    }
}

/// Separation probability bounds for one spectrum.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HdecertBounds {
    pub psep_lb: f64,
    pub psep_h: f64,
    pub plc_ub: f64,
}

impl From<separation::Bounds> for HdecertBounds {
    fn from(b: separation::Bounds) -> Self {
        Self {
            psep_lb: b.psep_lb,
            psep_h: b.psep_h,
            plc_ub: b.plc_ub,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HdecertPlan {
    pub separation_probability: f64,
    pub tests_required: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HdecertSpectralGap {
    pub beta: f64,
    pub nu: f64,
}

/// Opaque Schmidt spectrum.
pub struct HdecertSpectrum(SchmidtSpectrum);

/// Opaque Hermitian operator.
pub struct HdecertOperator(HermitianOperator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> HdecertStatus {
    match err {
        Error::Infeasible(_) => HdecertStatus::Infeasible,
        Error::Numerical(_) | Error::BranchMismatch { .. } | Error::TargetNotFixed(_) => HdecertStatus::Numerical,
        _ => HdecertStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HdecertStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HdecertStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HdecertStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HdecertStatus::Panic
        }
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    out.write(value);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (nul-terminated,
/// truncated to `len`). Returns the buffer size needed for the full message,
/// or zero if there is no error recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hdecert_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hdecert_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a spectrum from `len` coefficients summing to one.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_spectrum_new(
    values: *const f64,
    len: usize,
    out: *mut *mut HdecertSpectrum,
) -> HdecertStatus {
    guard(|| {
        if values.is_null() {
            return Err(Failure::Null("values"));
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let s = SchmidtSpectrum::new(v)?;
        write(out, Box::into_raw(Box::new(HdecertSpectrum(s))))
    })
}

/// Uniform spectrum of the maximally entangled state in dimension `d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_spectrum_uniform(d: usize, out: *mut *mut HdecertSpectrum) -> HdecertStatus {
    guard(|| {
        let s = SchmidtSpectrum::uniform(d)?;
        write(out, Box::into_raw(Box::new(HdecertSpectrum(s))))
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hdecert_spectrum_free(s: *mut HdecertSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Local dimension of the spectrum, or zero for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hdecert_spectrum_dim(s: *const HdecertSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies the sorted coefficients into `values` (at most `len` entries).
/// Returns the dimension.
///
/// # Safety
/// `s` must be a live handle; `values` must be null or hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hdecert_spectrum_values(s: *const HdecertSpectrum, values: *mut f64, len: usize) -> usize {
    let Some(s) = s.as_ref() else { return 0 };
    let v = s.0.values();
    if !values.is_null() {
        ptr::copy_nonoverlapping(v.as_ptr(), values, v.len().min(len));
    }
    v.len()
}

/// Tail weight `E_r`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_e_r(s: *const HdecertSpectrum, r: usize, out: *mut f64) -> HdecertStatus {
    guard(|| {
        let s = deref(s, "spectrum")?;
        write(out, spectra::e_r(&s.0, r)?)
    })
}

/// Largest fidelity with states whose `E_r` is at most `e`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_fidelity_limited(
    s: *const HdecertSpectrum,
    r: usize,
    e: f64,
    out: *mut f64,
) -> HdecertStatus {
    guard(|| {
        let s = deref(s, "spectrum")?;
        write(out, spectra::fidelity_limited(&s.0, r, e)?)
    })
}

/// Bounds against states of Schmidt number at most `r`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_bounds_rank(
    s: *const HdecertSpectrum,
    r: usize,
    out: *mut HdecertBounds,
) -> HdecertStatus {
    guard(|| {
        let s = deref(s, "spectrum")?;
        write(out, separation::bounds_rank(&s.0, r)?.into())
    })
}

/// Bounds against states with `E_r ≤ e`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_bounds_limited(
    s: *const HdecertSpectrum,
    r: usize,
    e: f64,
    out: *mut HdecertBounds,
) -> HdecertStatus {
    guard(|| {
        let s = deref(s, "spectrum")?;
        write(out, separation::bounds_limited(&s.0, r, e)?.into())
    })
}

/// `(r+1)/(d+1)` for the maximally entangled state.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_sep_prob_mes_rank(d: usize, r: usize, out: *mut f64) -> HdecertStatus {
    guard(|| write(out, separation::sep_prob_mes_rank(d, r)?))
}

/// Smallest `N` with `p^N ≤ delta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_tests_required(p: f64, delta: f64, out: *mut u64) -> HdecertStatus {
    guard(|| write(out, separation::tests_required(p, delta)?))
}

/// Test budget for `strategy` against `E_r ≤ e` (pass `e = 0` for Schmidt
/// number at most `r`).
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_plan(
    s: *const HdecertSpectrum,
    r: usize,
    e: f64,
    delta: f64,
    strategy: HdecertStrategy,
    out: *mut HdecertPlan,
) -> HdecertStatus {
    guard(|| {
        let s = deref(s, "spectrum")?;
        let set = if e == 0.0 {
            AdversarySet::SchmidtRank { r }
        } else {
            AdversarySet::LimitedEr { r, e }
        };
        let p = separation::plan(&s.0, set, delta, strategy.into())?;
        write(
            out,
            HdecertPlan {
                separation_probability: p.separation_probability,
                tests_required: p.tests_required,
            },
        )
    })
}

unsafe fn new_operator(out: *mut *mut HdecertOperator, op: HermitianOperator) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(HdecertOperator(op))))
}

/// 2-design operator for the maximally entangled state in dimension `d`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_opt(d: usize, out: *mut *mut HdecertOperator) -> HdecertStatus {
    guard(|| new_operator(out, operators::omega_opt(d)?))
}

/// Optimal separable homogeneous operator.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_sep_h(
    s: *const HdecertSpectrum,
    out: *mut *mut HdecertOperator,
) -> HdecertStatus {
    guard(|| new_operator(out, operators::omega_sep_h(&deref(s, "spectrum")?.0)))
}

/// Local homogeneous operator.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_lc_h(
    s: *const HdecertSpectrum,
    out: *mut *mut HdecertOperator,
) -> HdecertStatus {
    guard(|| new_operator(out, operators::omega_lc_h(&deref(s, "spectrum")?.0)))
}

/// Averaged operator of the two-test Fourier strategy.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_mub(
    s: *const HdecertSpectrum,
    out: *mut *mut HdecertOperator,
) -> HdecertStatus {
    guard(|| {
        let strategy = operators::omega_mub(&deref(s, "spectrum")?.0)?;
        new_operator(out, strategy.operator().clone())
    })
}

/// Two-qubit family member `Ω(θ, p)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_two_qubit(
    theta: f64,
    p: f64,
    out: *mut *mut HdecertOperator,
) -> HdecertStatus {
    guard(|| new_operator(out, twoqubit::omega_family(theta, p)?))
}

/// # Safety
/// `op` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_free(op: *mut HdecertOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Matrix dimension, or zero for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_dim(op: *const HdecertOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// Copies the entries in row-major order into `re` and `im`, each holding
/// `len ≥ dim²` doubles.
///
/// # Safety
/// `op` must be a live handle; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_entries(
    op: *const HdecertOperator,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> HdecertStatus {
    guard(|| {
        let op = deref(op, "operator")?;
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        let n = op.0.dim();
        if len < n * n {
            return Err(Error::InvalidArgument(format!("buffer holds {len} entries, need {}", n * n)).into());
        }
        let m = op.0.entries();
        for i in 0..n {
            for j in 0..n {
                *re.add(i * n + j) = m[(i, j)].re;
                *im.add(i * n + j) = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// Spectral gap of `op` relative to the target state with spectrum `s`
/// (local dimension `dim(s)` on both sides).
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_operator_spectral_gap(
    op: *const HdecertOperator,
    s: *const HdecertSpectrum,
    out: *mut HdecertSpectralGap,
) -> HdecertStatus {
    guard(|| {
        let op = deref(op, "operator")?;
        let s = deref(s, "spectrum")?;
        let target = operators::target_state(&s.0, s.0.dim())?;
        let gap = operators::spectral_gap(&op.0, &target)?;
        write(out, HdecertSpectralGap { beta: gap.beta, nu: gap.nu })
    })
}

/// Separation probability of the optimal two-qubit strategy for
/// `cos θ |00⟩ + sin θ |11⟩`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdecert_two_qubit_sep_prob(theta: f64, out: *mut f64) -> HdecertStatus {
    guard(|| write(out, twoqubit::sep_prob_two_qubit(theta)?))
}

/// Angle where the optimal two-qubit strategy changes branch.
#[no_mangle]
pub extern "C" fn hdecert_theta_star() -> f64 {
    twoqubit::theta_star()
}
