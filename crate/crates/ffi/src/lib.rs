//! C interface to `qrw_core`.
//!
//! Objects cross the boundary as opaque handles created by `qrw_*_new` /
//! `qrw_*_from_*` / `qrw_sweep_run` and released by the matching `*_free`.
//! Every fallible call returns a status code; on failure the message is
//! available from [`qrw_last_error`] until the next failing call on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qrw_core::cocycle::{qs_element, semigroup_element_vacuum};
use qrw_core::generators::{example7_theta, example7_walk, Generator};
use qrw_core::lab::config::{GeneratorDescriptor, SweepConfig};
use qrw_core::lab::sweep::{convergence_sweep, ConvergenceReport};
use qrw_core::linops::{Operator, C64};
use qrw_core::signals::StepFunction;
use qrw_core::toywalk::{walk_element_identity, walk_element_vacuum, ExpVectorLabel};
use qrw_core::QrwError;

pub const QRW_OK: i32 = 0;
/// A required pointer argument was null.
pub const QRW_ERR_NULL: i32 = 1;
/// Malformed input: bad JSON, inconsistent dimensions, invalid data.
pub const QRW_ERR_INPUT: i32 = 2;
/// Dimension budget or series truncation cap exceeded.
pub const QRW_ERR_BUDGET: i32 = 3;
/// A Rust panic was caught at the boundary.
pub const QRW_ERR_PANIC: i32 = 4;

pub const QRW_VACUUM: i32 = 0;
pub const QRW_IDENTITY: i32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QrwComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for QrwComplex {
    fn from(z: C64) -> Self {
        QrwComplex { re: z.re, im: z.im }
    }
}

impl From<QrwComplex> for C64 {
    fn from(z: QrwComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// A generator φ: B(ℂ^{d_h}) → B(ℂ^{d_h} ⊗ k̂).
pub struct QrwGenerator(Generator);

/// An exponential-vector label u ⊗ ε(f).
pub struct QrwLabel(ExpVectorLabel);

/// Result of a convergence sweep.
pub struct QrwSweepReport(ConvergenceReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(i32, String);

impl From<QrwError> for Fail {
    fn from(e: QrwError) -> Self {
        let code = match e {
            QrwError::Budget { .. } | QrwError::TruncationCap { .. } => QRW_ERR_BUDGET,
            _ => QRW_ERR_INPUT,
        };
        Fail(code, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QRW_ERR_NULL, format!("{what} is null"))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QRW_OK,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            QRW_ERR_PANIC
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail(QRW_ERR_INPUT, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn square_arg(a: *const QrwComplex, d: usize) -> Result<Operator, Fail> {
    let data = slice_arg(a, d * d, "a")?.iter().map(|&z| z.into()).collect();
    Ok(Operator::from_data(&[d], &[d], data)?)
}

fn to_c_string(s: String) -> Result<CString, Fail> {
    CString::new(s).map_err(|_| Fail(QRW_ERR_INPUT, "output contains a nul byte".into()))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qrw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a generator descriptor (`{"kind": ...}`); `seed` fills in a missing
/// seed for `random_gksl`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer to writable
/// storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qrw_generator_from_json(json: *const c_char, seed: u64, out: *mut *mut QrwGenerator) -> i32 {
    guard(|| {
        let text = str_arg(json, "json")?;
        let value: serde_json::Value = serde_json::from_str(text).map_err(QrwError::from)?;
        let gen = GeneratorDescriptor::from_json(&value)?.generator(seed)?;
        put(out, QrwGenerator(gen))
    })
}

/// The scalar example: the walk generator at step `h` if `h > 0`, the
/// identity-adapted limit generator θ otherwise.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qrw_generator_example7(c: f64, h: f64, out: *mut *mut QrwGenerator) -> i32 {
    guard(|| put(out, QrwGenerator(if h > 0.0 { example7_walk(c, h) } else { example7_theta(c) })))
}

/// # Safety
/// `gen` must be a live handle; `d_h` and `d_k` must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn qrw_generator_dims(gen: *const QrwGenerator, d_h: *mut usize, d_k: *mut usize) -> i32 {
    guard(|| {
        let g = &ref_arg(gen, "generator")?.0;
        if d_h.is_null() || d_k.is_null() {
            return Err(null("dimension output"));
        }
        *d_h = g.d_h();
        *d_k = g.d_k();
        Ok(())
    })
}

/// # Safety
/// `gen` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qrw_generator_free(gen: *mut QrwGenerator) {
    if !gen.is_null() {
        drop(Box::from_raw(gen));
    }
}

/// Builds the label u ⊗ ε(f) with u ∈ ℂ^{d_h} and f a ℂ^{d_k}-valued step
/// function: value `values[p·d_k .. (p+1)·d_k]` on
/// `[breakpoints[p], breakpoints[p+1])`, the last piece ending at
/// `support_end`. `pieces = 0` gives f = 0.
///
/// # Safety
/// `u` must point to `d_h` values, `breakpoints` to `pieces` values and
/// `values` to `pieces·d_k` values; `out` must be valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn qrw_label_new(
    u: *const QrwComplex,
    d_h: usize,
    d_k: usize,
    breakpoints: *const f64,
    values: *const QrwComplex,
    pieces: usize,
    support_end: f64,
    out: *mut *mut QrwLabel,
) -> i32 {
    guard(|| {
        let u: Vec<C64> = slice_arg(u, d_h, "u")?.iter().map(|&z| z.into()).collect();
        let f = if pieces == 0 {
            StepFunction::zero(d_k)
        } else {
            let bps = slice_arg(breakpoints, pieces, "breakpoints")?.to_vec();
            let vals = slice_arg(values, pieces * d_k, "values")?;
            let vals = vals.chunks(d_k.max(1)).map(|c| c.iter().map(|&z| z.into()).collect()).collect();
            StepFunction::new(d_k, bps, vals, support_end)?
        };
        put(out, QrwLabel(ExpVectorLabel::new(u, f)))
    })
}

/// # Safety
/// `label` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qrw_label_free(label: *mut QrwLabel) {
    if !label.is_null() {
        drop(Box::from_raw(label));
    }
}

/// ⟨v ε(g), J_t(a) u ε(f)⟩ for the walk of `phi` at step `h`, with
/// `adaptedness` `QRW_VACUUM` or `QRW_IDENTITY`. `a` is d_h×d_h, row-major.
///
/// # Safety
/// Handles must be live, `a` must point to d_h² values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrw_walk_element(
    phi: *const QrwGenerator,
    h: f64,
    t: f64,
    adaptedness: i32,
    a: *const QrwComplex,
    bra: *const QrwLabel,
    ket: *const QrwLabel,
    out: *mut QrwComplex,
) -> i32 {
    guard(|| {
        let phi = &ref_arg(phi, "generator")?.0;
        let a = square_arg(a, phi.d_h())?;
        let (bra, ket) = (&ref_arg(bra, "bra")?.0, &ref_arg(ket, "ket")?.0);
        if out.is_null() {
            return Err(null("out"));
        }
        let v = match adaptedness {
            QRW_VACUUM => walk_element_vacuum(phi, h, t, &a, bra, ket)?,
            QRW_IDENTITY => walk_element_identity(phi, h, t, &a, bra, ket)?,
            other => return Err(Fail(QRW_ERR_INPUT, format!("unknown adaptedness {other}"))),
        };
        *out = v.into();
        Ok(())
    })
}

/// ⟨v ε(g), j_t(a) u ε(f)⟩ for the vacuum-adapted cocycle of `psi`
/// (`QRW_VACUUM`) or the identity-adapted cocycle of `theta` (`QRW_IDENTITY`).
///
/// # Safety
/// Handles must be live, `a` must point to d_h² values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrw_cocycle_element(
    gen: *const QrwGenerator,
    t: f64,
    adaptedness: i32,
    a: *const QrwComplex,
    bra: *const QrwLabel,
    ket: *const QrwLabel,
    out: *mut QrwComplex,
) -> i32 {
    guard(|| {
        let gen = &ref_arg(gen, "generator")?.0;
        let a = square_arg(a, gen.d_h())?;
        let (bra, ket) = (&ref_arg(bra, "bra")?.0, &ref_arg(ket, "ket")?.0);
        if out.is_null() {
            return Err(null("out"));
        }
        let v = match adaptedness {
            QRW_VACUUM => semigroup_element_vacuum(gen, t, &a, bra, ket)?,
            QRW_IDENTITY => qs_element(gen, t, &a, bra, ket)?,
            other => return Err(Fail(QRW_ERR_INPUT, format!("unknown adaptedness {other}"))),
        };
        *out = v.into();
        Ok(())
    })
}

/// Runs a convergence sweep from a JSON config (the `converge` schema).
///
/// # Safety
/// `config_json` must be a nul-terminated string and `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn qrw_sweep_run(config_json: *const c_char, seed: u64, out: *mut *mut QrwSweepReport) -> i32 {
    guard(|| {
        let cfg = SweepConfig::from_json_str(str_arg(config_json, "config")?)?;
        put(out, QrwSweepReport(convergence_sweep(&cfg, seed)?))
    })
}

/// 1 if the sweep passed, 0 if not, -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrw_sweep_passed(report: *const QrwSweepReport) -> i32 {
    report.as_ref().map_or(-1, |r| r.0.passed as i32)
}

/// Number of step sizes in the sweep (0 for a null handle).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrw_sweep_len(report: *const QrwSweepReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.sup.len())
}

/// Step size and sup error of entry `i`.
///
/// # Safety
/// `report` must be a live handle; `h` and `sup` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrw_sweep_sup(report: *const QrwSweepReport, i: usize, h: *mut f64, sup: *mut f64) -> i32 {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        let row = r.sup.get(i).ok_or_else(|| Fail(QRW_ERR_INPUT, format!("index {i} out of range")))?;
        if h.is_null() || sup.is_null() {
            return Err(null("output"));
        }
        *h = row.h;
        *sup = row.sup_abs_err;
        Ok(())
    })
}

/// The sweep as CSV; release the string with [`qrw_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrw_sweep_csv(report: *const QrwSweepReport, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_c_string(r.to_csv())?.into_raw();
        Ok(())
    })
}

/// The sweep as JSON; release the string with [`qrw_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrw_sweep_json(report: *const QrwSweepReport, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let r = &ref_arg(report, "report")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = serde_json::to_string_pretty(r).map_err(QrwError::from)?;
        *out = to_c_string(text)?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qrw_sweep_free(report: *mut QrwSweepReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qrw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
