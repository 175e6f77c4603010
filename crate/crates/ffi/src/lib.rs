//! C ABI over the `renormal` core.
//!
//! Objects cross the boundary as opaque pointers created by `rn_*_new` /
//! `rn_*_from_preset` and released with the matching `rn_*_free`. Every
//! fallible call returns an [`RnStatus`]; on failure the message is kept in a
//! per-thread slot readable through [`rn_last_error`]. Panics are caught at
//! the boundary and reported as `RN_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use renormal::commutators::Commutators;
use renormal::fields::{lq_norm, lq_norm_vector, Exponent};
use renormal::harness::config::ExperimentConfig;
use renormal::harness::report::{ConvergenceReport, Verdict};
use renormal::presets::{gen_sigma, gen_u, SigmaPreset, UPreset};
use renormal::{build_kernel, make_grid, mollify, Error, ErrorClass, KernelKind, MollifierKernel, ScalarField, SigmaField};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RnStatus {
    RnOk = 0,
    /// A required pointer argument was null.
    RnNullPointer = 1,
    /// A string argument was not valid UTF-8, or a length did not match.
    RnInvalidArgument = 2,
    /// Malformed configuration or unknown preset.
    RnConfig = 3,
    /// A numerical precondition failed (resolution, CFL, exponent range).
    RnNumerical = 4,
    /// File system or serialization failure.
    RnIo = 5,
    /// The library panicked; the handle arguments are left untouched.
    RnPanic = 6,
}

/// Scalar grid field on the periodic torus.
pub struct RnField(ScalarField);

/// Noise coefficient matrix field.
pub struct RnSigma(SigmaField);

/// Sampled, normalized mollifier kernel.
pub struct RnKernel(MollifierKernel);

/// Result of a config-driven experiment.
pub struct RnReport(ConvergenceReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

struct Failure(RnStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.class() {
            ErrorClass::Config => RnStatus::RnConfig,
            ErrorClass::Numerical => RnStatus::RnNumerical,
            ErrorClass::Io => RnStatus::RnIo,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(RnStatus::RnInvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RnStatus::RnOk,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            RnStatus::RnPanic
        }
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(RnStatus::RnNullPointer, format!("`{name}` is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(RnStatus::RnNullPointer, format!("`{name}` is null")))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(RnStatus::RnNullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))
}

/// `q <= 0` or infinite selects the sup norm.
fn exponent(q: f64) -> Exponent {
    if q.is_infinite() || q <= 0.0 {
        Exponent::Infinite
    } else {
        Exponent::Finite(q)
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rn_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `len` values (`len` must equal `n^d`) into a new field.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_field_new(
    d: usize,
    n: usize,
    values: *const f64,
    len: usize,
    out_field: *mut *mut RnField,
) -> RnStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let grid = make_grid(d, n)?;
        if values.is_null() {
            return Err(Failure(RnStatus::RnNullPointer, "`values` is null".into()));
        }
        if len != grid.len() {
            return Err(invalid(format!("expected {} values, got {len}", grid.len())));
        }
        let data = std::slice::from_raw_parts(values, len).to_vec();
        *slot = boxed(RnField(ScalarField::from_values(grid, data)?));
        Ok(())
    })
}

/// Builds a field from a named preset such as `"box-indicator 0.25 0.75"`.
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_field_from_preset(
    d: usize,
    n: usize,
    preset: *const c_char,
    seed: u64,
    out_field: *mut *mut RnField,
) -> RnStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let preset: UPreset = text(preset, "preset")?.parse()?;
        *slot = boxed(RnField(gen_u(&preset, make_grid(d, n)?, seed)));
        Ok(())
    })
}

/// Number of grid values, `n^d`. Returns 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rn_field_len(field: *const RnField) -> usize {
    field.as_ref().map_or(0, |f| f.0.values().len())
}

/// Copies the field values (row-major, last axis fastest) into `buf`.
///
/// # Safety
/// `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rn_field_values(field: *const RnField, buf: *mut f64, len: usize) -> RnStatus {
    guard(|| {
        let f = arg(field, "field")?;
        if buf.is_null() {
            return Err(Failure(RnStatus::RnNullPointer, "`buf` is null".into()));
        }
        let values = f.0.values();
        if len != values.len() {
            return Err(invalid(format!("buffer holds {len} values, field has {}", values.len())));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(values);
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rn_field_free(field: *mut RnField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Builds `σ` with `m` noise columns from a named preset (`"trig"`,
/// `"constant 0.5"`, `"fourier-decay 2"`, `"divergence-free"`).
///
/// # Safety
/// `preset` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_sigma_from_preset(
    d: usize,
    n: usize,
    m: usize,
    preset: *const c_char,
    seed: u64,
    out_sigma: *mut *mut RnSigma,
) -> RnStatus {
    guard(|| {
        let slot = out(out_sigma, "out_sigma")?;
        let preset: SigmaPreset = text(preset, "preset")?.parse()?;
        *slot = boxed(RnSigma(gen_sigma(&preset, make_grid(d, n)?, m, seed)?));
        Ok(())
    })
}

/// # Safety
/// `sigma` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rn_sigma_free(sigma: *mut RnSigma) {
    if !sigma.is_null() {
        drop(Box::from_raw(sigma));
    }
}

/// Samples a kernel (`"bump"` or `"truncated-gaussian"`) of width `delta`.
///
/// # Safety
/// `kind` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_kernel_new(
    kind: *const c_char,
    delta: f64,
    d: usize,
    n: usize,
    out_kernel: *mut *mut RnKernel,
) -> RnStatus {
    guard(|| {
        let slot = out(out_kernel, "out_kernel")?;
        let kind: KernelKind = text(kind, "kind")?.parse()?;
        *slot = boxed(RnKernel(build_kernel(kind, delta, make_grid(d, n)?)?));
        Ok(())
    })
}

/// # Safety
/// `kernel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rn_kernel_free(kernel: *mut RnKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Discrete `L^q` norm; `q <= 0` or infinite gives the maximum norm.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_lq_norm(field: *const RnField, q: f64, out_norm: *mut f64) -> RnStatus {
    guard(|| {
        let f = arg(field, "field")?;
        *out(out_norm, "out_norm")? = lq_norm(&f.0, exponent(q))?;
        Ok(())
    })
}

/// `J_δ * f` as a new field.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_mollify(
    field: *const RnField,
    kernel: *const RnKernel,
    out_field: *mut *mut RnField,
) -> RnStatus {
    guard(|| {
        let (f, k) = (arg(field, "field")?, arg(kernel, "kernel")?);
        let slot = out(out_field, "out_field")?;
        *slot = boxed(RnField(mollify(&f.0, &k.0)?));
        Ok(())
    })
}

unsafe fn commutators<'a>(sigma: *const RnSigma, kernel: *const RnKernel) -> Result<Commutators<'a>, Failure> {
    let (s, k) = (arg(sigma, "sigma")?, arg(kernel, "kernel")?);
    Ok(Commutators::new(&s.0, &k.0)?)
}

/// `L^q` norm of the vector field `E2 = J K u - K J u`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_e2_norm(
    sigma: *const RnSigma,
    u: *const RnField,
    kernel: *const RnKernel,
    q: f64,
    out_norm: *mut f64,
) -> RnStatus {
    guard(|| {
        let c = commutators(sigma, kernel)?;
        let e2 = c.e2(&arg(u, "u")?.0)?;
        *out(out_norm, "out_norm")? = lq_norm_vector(&e2, exponent(q))?;
        Ok(())
    })
}

/// The double commutator `[[K, J], K] u` as a new field.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_double_commutator(
    sigma: *const RnSigma,
    u: *const RnField,
    kernel: *const RnKernel,
    out_field: *mut *mut RnField,
) -> RnStatus {
    guard(|| {
        let c = commutators(sigma, kernel)?;
        let slot = out(out_field, "out_field")?;
        *slot = boxed(RnField(c.double_commutator(&arg(u, "u")?.0)?));
        Ok(())
    })
}

/// Runs the experiment described by a TOML config file. Nothing is written
/// to disk unless the config sets an output directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_run_config(path: *const c_char, out_report: *mut *mut RnReport) -> RnStatus {
    guard(|| {
        let slot = out(out_report, "out_report")?;
        let cfg = ExperimentConfig::load(Path::new(text(path, "path")?))?;
        let (report, _) = renormal::harness::run(&cfg)?;
        *slot = boxed(RnReport(report));
        Ok(())
    })
}

/// 1 for pass, 2 for a degenerate pass, 0 for fail, -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rn_report_verdict(report: *const RnReport) -> i32 {
    match report.as_ref().map(|r| r.0.verdict) {
        Some(Verdict::Pass) => 1,
        Some(Verdict::DegeneratePass) => 2,
        Some(Verdict::Fail) => 0,
        None => -1,
    }
}

/// The report as JSON. Release the string with [`rn_string_free`].
///
/// # Safety
/// `report` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rn_report_json(report: *const RnReport, out_json: *mut *mut c_char) -> RnStatus {
    guard(|| {
        let r = arg(report, "report")?;
        let slot = out(out_json, "out_json")?;
        *slot = CString::new(r.0.to_json()).map_err(|_| invalid("report contains a NUL byte"))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rn_report_free(report: *mut RnReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
