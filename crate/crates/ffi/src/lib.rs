//! C ABI over `mittag-core`.
//!
//! Every function returns a [`MittagStatus`]. On failure the message of the
//! most recent error on the calling thread is available from
//! [`mittag_last_error`]. Handles are opaque, created by `*_new` and released
//! by the matching `*_free`; they may be shared between threads for reading.
//! Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mittag_core::bessel::{bessel_j, BesselOrder};
use mittag_core::fracpde::{solution_multiplier, solve_homogeneous, BoxGrid, ProblemSpec, Profile};
use mittag_core::mlf::{mlf_ray, mlf_series, MlParams, RayEvaluator, RaySpec};
use mittag_core::radial::{admissible_exponents, KernelTransform};
use mittag_core::Error;
use num_complex::Complex64;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MittagStatus {
    Ok = 0,
    /// Rejected parameters.
    Invalid = 1,
    /// A numerical routine failed.
    Numerical = 2,
    /// A required pointer was null or a buffer had the wrong length.
    NullPointer = 3,
    /// A panic was caught at the boundary.
    Internal = 4,
}

/// Cached evaluator of E_{α,β}(e^{iπs} r^γ) along one ray.
pub struct MittagEvaluator {
    inner: RayEvaluator,
}

/// Radial Fourier transform of the ray kernel in a fixed dimension.
pub struct MittagKernel {
    inner: KernelTransform,
}

/// Cauchy problem with Gaussian initial data.
pub struct MittagProblem {
    spec: ProblemSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MittagStatus {
    set_error(&e.to_string());
    if e.is_validation() {
        MittagStatus::Invalid
    } else {
        MittagStatus::Numerical
    }
}

fn guard<F: FnOnce() -> Result<(), MittagStatus>>(f: F) -> MittagStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MittagStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            MittagStatus::Internal
        }
    }
}

fn null() -> MittagStatus {
    set_error("null pointer argument");
    MittagStatus::NullPointer
}

/// Stores `v` through two output pointers.
///
/// # Safety
/// Both pointers must be valid for writes or null.
unsafe fn store(v: Complex64, re: *mut f64, im: *mut f64) -> Result<(), MittagStatus> {
    if re.is_null() || im.is_null() {
        return Err(null());
    }
    *re = v.re;
    *im = v.im;
    Ok(())
}

/// Message of the last failure on this thread; empty when none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mittag_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// E_{α,β}(z) by the power series; any α > 0 (including α = 2) is accepted.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mittag_mlf_series(
    alpha: f64,
    beta: f64,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MittagStatus {
    guard(|| {
        let params = MlParams { alpha, beta };
        let v = mlf_series(&params, Complex64::new(z_re, z_im)).map_err(|e| status_of(&e))?;
        store(v, out_re, out_im)
    })
}

/// E_{α,β}(e^{iπs} r^γ), choosing series or contour automatically.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mittag_mlf_ray(
    alpha: f64,
    beta: f64,
    s: f64,
    gamma: f64,
    r: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MittagStatus {
    guard(|| {
        let params = MlParams::new(alpha, beta).map_err(|e| status_of(&e))?;
        let ray = RaySpec::new(s, gamma).map_err(|e| status_of(&e))?;
        let v = mlf_ray(&params, &ray, r).map_err(|e| status_of(&e))?;
        store(v, out_re, out_im)
    })
}

/// Bessel function J_λ(x) for λ ≥ −1/2 and x ≥ 0.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mittag_bessel_j(lambda: f64, x: f64, out: *mut f64) -> MittagStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let order = BesselOrder::new(lambda).map_err(|e| status_of(&e))?;
        *out = bessel_j(order, x).map_err(|e| status_of(&e))?;
        Ok(())
    })
}

/// Admissible L^p range (1, upper) of the kernel transform; `upper` may be +∞
/// and `upper_inclusive` is set to 1 when the endpoint belongs to the range.
///
/// # Safety
/// All output pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mittag_admissible_exponents(
    gamma: f64,
    d: u32,
    lower: *mut f64,
    upper: *mut f64,
    upper_inclusive: *mut i32,
) -> MittagStatus {
    guard(|| {
        if lower.is_null() || upper.is_null() || upper_inclusive.is_null() {
            return Err(null());
        }
        if !(gamma > 0.0 && gamma.is_finite()) || d == 0 {
            set_error("gamma must be positive and d at least 1");
            return Err(MittagStatus::Invalid);
        }
        let r = admissible_exponents(gamma, d);
        *lower = r.lower;
        *upper = r.upper;
        *upper_inclusive = i32::from(r.upper_inclusive);
        Ok(())
    })
}

/// Builds an evaluator for a decay ray.
///
/// # Safety
/// `out` must be valid for writes; release the handle with [`mittag_evaluator_free`].
#[no_mangle]
pub unsafe extern "C" fn mittag_evaluator_new(
    alpha: f64,
    beta: f64,
    s: f64,
    gamma: f64,
    out: *mut *mut MittagEvaluator,
) -> MittagStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let params = MlParams::new(alpha, beta).map_err(|e| status_of(&e))?;
        let ray = RaySpec::new(s, gamma).map_err(|e| status_of(&e))?;
        let inner = RayEvaluator::new(&params, &ray).map_err(|e| status_of(&e))?;
        *out = Box::into_raw(Box::new(MittagEvaluator { inner }));
        Ok(())
    })
}

/// E_{α,β}(e^{iπs} r^γ) for `n` values of r.
///
/// # Safety
/// `h` must come from [`mittag_evaluator_new`]; `r`, `out_re` and `out_im`
/// must each point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn mittag_evaluator_eval(
    h: *const MittagEvaluator,
    r: *const f64,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MittagStatus {
    guard(|| {
        if h.is_null() || (n > 0 && (r.is_null() || out_re.is_null() || out_im.is_null())) {
            return Err(null());
        }
        if n == 0 {
            return Ok(());
        }
        let ev = &(*h).inner;
        let rs = std::slice::from_raw_parts(r, n);
        if let Some(bad) = rs.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            set_error(&format!("r must be finite and nonnegative, got {bad}"));
            return Err(MittagStatus::Invalid);
        }
        let re = std::slice::from_raw_parts_mut(out_re, n);
        let im = std::slice::from_raw_parts_mut(out_im, n);
        for (k, &x) in rs.iter().enumerate() {
            let v = ev.eval(x);
            re[k] = v.re;
            im[k] = v.im;
        }
        Ok(())
    })
}

/// Releases an evaluator; null is ignored.
///
/// # Safety
/// `h` must come from [`mittag_evaluator_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mittag_evaluator_free(h: *mut MittagEvaluator) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Prepares the radial transform of ξ ↦ E_{α,β}(e^{iπs}|ξ|^γ) in dimension d.
///
/// # Safety
/// `out` must be valid for writes; release with [`mittag_kernel_free`].
#[no_mangle]
pub unsafe extern "C" fn mittag_kernel_new(
    alpha: f64,
    beta: f64,
    s: f64,
    gamma: f64,
    d: u32,
    out: *mut *mut MittagKernel,
) -> MittagStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let params = MlParams::new(alpha, beta).map_err(|e| status_of(&e))?;
        let ray = RaySpec::new(s, gamma).map_err(|e| status_of(&e))?;
        let inner = KernelTransform::new(&params, &ray, d).map_err(|e| status_of(&e))?;
        *out = Box::into_raw(Box::new(MittagKernel { inner }));
        Ok(())
    })
}

/// Transform value at |x| = xi > 0.
///
/// # Safety
/// `h` must come from [`mittag_kernel_new`]; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mittag_kernel_eval(
    h: *const MittagKernel,
    xi: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MittagStatus {
    guard(|| {
        if h.is_null() {
            return Err(null());
        }
        let v = (*h).inner.eval(xi).map_err(|e| status_of(&e))?;
        store(v, out_re, out_im)
    })
}

/// Releases a kernel handle; null is ignored.
///
/// # Safety
/// `h` must come from [`mittag_kernel_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mittag_kernel_free(h: *mut MittagKernel) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Problem e^{iπμ}∂_t^α u = e^{iπν}(−Δ)^{β/2}u with u(0) = exp(−|x|²/width²).
///
/// # Safety
/// `out` must be valid for writes; release with [`mittag_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn mittag_problem_new(
    alpha: f64,
    beta: f64,
    mu: f64,
    nu: f64,
    width: f64,
    out: *mut *mut MittagProblem,
) -> MittagStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let spec =
            ProblemSpec::new(alpha, beta, mu, nu, Profile::gaussian(width)).map_err(|e| status_of(&e))?;
        *out = Box::into_raw(Box::new(MittagProblem { spec }));
        Ok(())
    })
}

/// Fourier multiplier E_α(e^{iπ s_eff} t^α |ξ|^β) of the problem.
///
/// # Safety
/// `h` must come from [`mittag_problem_new`]; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mittag_problem_multiplier(
    h: *const MittagProblem,
    t: f64,
    xi: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MittagStatus {
    guard(|| {
        if h.is_null() {
            return Err(null());
        }
        let v = solution_multiplier(&(*h).spec, t, xi).map_err(|e| status_of(&e))?;
        store(v, out_re, out_im)
    })
}

/// Solution at time t on the periodic box of side `box_length` with `n`
/// points per axis in dimension `d`; writes n^d values row-major.
///
/// # Safety
/// `h` must come from [`mittag_problem_new`]; `out_re` and `out_im` must each
/// point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mittag_problem_solve(
    h: *const MittagProblem,
    d: u32,
    n: usize,
    box_length: f64,
    t: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> MittagStatus {
    guard(|| {
        if h.is_null() || out_re.is_null() || out_im.is_null() {
            return Err(null());
        }
        let grid = BoxGrid::new(d, n, box_length).map_err(|e| status_of(&e))?;
        if grid.len() != len {
            set_error(&format!("buffer holds {len} values, grid needs {}", grid.len()));
            return Err(MittagStatus::NullPointer);
        }
        let field = solve_homogeneous(&(*h).spec, &grid, t).map_err(|e| status_of(&e))?;
        let re = std::slice::from_raw_parts_mut(out_re, len);
        let im = std::slice::from_raw_parts_mut(out_im, len);
        for (k, v) in field.values.iter().enumerate() {
            re[k] = v.re;
            im[k] = v.im;
        }
        Ok(())
    })
}

/// Releases a problem handle; null is ignored.
///
/// # Safety
/// `h` must come from [`mittag_problem_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mittag_problem_free(h: *mut MittagProblem) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
