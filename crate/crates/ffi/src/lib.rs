//! C ABI over `filtered_spectra`.
//!
//! Kernels are opaque handles created from a JSON document (either a filter
//! or a kernel table) and released with [`fs_kernel_free`]. Every fallible
//! call returns an [`FsStatus`]; on failure the message is available from
//! [`fs_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use filtered_spectra::colorsolve::{density_profile_with, ColorSolver};
use filtered_spectra::moments::theoretical_moments;
use filtered_spectra::{validate_kernel, Error, Kernel};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Parse = 4,
    KernelInvalid = 5,
    NonConvergence = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 9,
}

/// Opaque kernel handle.
pub struct FsKernel {
    kernel: Kernel,
    solver: ColorSolver,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FsStatus {
    match e {
        Error::InvalidInput(_) | Error::SizeGuard { .. } | Error::DegreeCap { .. } => FsStatus::InvalidInput,
        Error::Parse(_) | Error::Json(_) => FsStatus::Parse,
        Error::KernelInvalid(_) => FsStatus::KernelInvalid,
        Error::NonConvergence { .. } | Error::DivisionGuard(_) => FsStatus::NonConvergence,
        _ => FsStatus::Internal,
    }
}

fn guard<F: FnOnce() -> Result<(), (FsStatus, String)>>(f: F) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside filtered-spectra".into());
            FsStatus::Panic
        }
    }
}

fn lib<T>(r: filtered_spectra::Result<T>) -> Result<T, (FsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (FsStatus, String) {
    (FsStatus::NullPointer, "null pointer argument".into())
}

/// Message of the last failing call on this thread, or NULL.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn fs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds and validates a kernel from a JSON filter or kernel document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_kernel_from_json(json: *const c_char, out: *mut *mut FsKernel) -> FsStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (FsStatus::InvalidUtf8, "kernel document is not UTF-8".to_string()))?;
        let kernel = lib(filtered_spectra::cli::kernel_from_document(text))?;
        lib(validate_kernel(&kernel).into_result())?;
        let solver = ColorSolver::new(&kernel);
        *out = Box::into_raw(Box::new(FsKernel { kernel, solver }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `k` must come from [`fs_kernel_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fs_kernel_free(k: *mut FsKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Spectral radius bound `A = 2 sqrt(sup s)`, or NaN for NULL.
///
/// # Safety
/// `k` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fs_kernel_a_bound(k: *const FsKernel) -> f64 {
    match k.as_ref() {
        Some(k) => k.solver.a_bound(),
        None => f64::NAN,
    }
}

/// Writes `m_1..m_kmax` into `out[0..kmax]`.
///
/// # Safety
/// `k` must be a live handle and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_theoretical_moments(k: *const FsKernel, kmax: usize, out: *mut f64, len: usize) -> FsStatus {
    guard(|| {
        let k = k.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        if len < kmax {
            return Err((FsStatus::BufferTooSmall, format!("need {kmax} doubles, got {len}")));
        }
        let m = lib(theoretical_moments(&k.kernel, kmax))?;
        ptr::copy_nonoverlapping(m.as_ptr(), out, kmax);
        Ok(())
    })
}

/// Stieltjes transform `S(lambda)` for any non-real `lambda`, or real `lambda` outside `[-A, A]`.
///
/// # Safety
/// `k` must be a live handle; `s_re` and `s_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_stieltjes(k: *const FsKernel, re: f64, im: f64, s_re: *mut f64, s_im: *mut f64) -> FsStatus {
    guard(|| {
        let k = k.as_ref().ok_or_else(null)?;
        if s_re.is_null() || s_im.is_null() {
            return Err(null());
        }
        let sol = lib(k.solver.solve_anywhere(Complex64::new(re, im)))?;
        *s_re = sol.stieltjes.re;
        *s_im = sol.stieltjes.im;
        Ok(())
    })
}

/// Density at `xs[0..n]` by Stieltjes inversion at heights `eps1 > eps2 > 0`.
/// Points where the solver failed are written as NaN and reported as
/// `FS_STATUS_NON_CONVERGENCE` after the whole grid has been filled.
///
/// # Safety
/// `k` must be a live handle; `xs` and `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_density(
    k: *const FsKernel,
    xs: *const f64,
    n: usize,
    eps1: f64,
    eps2: f64,
    out: *mut f64,
) -> FsStatus {
    guard(|| {
        let k = k.as_ref().ok_or_else(null)?;
        if n == 0 {
            return Ok(());
        }
        if xs.is_null() || out.is_null() {
            return Err(null());
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let grid = lib(density_profile_with(&k.solver, xs, (eps1, eps2)))?;
        ptr::copy_nonoverlapping(grid.density.as_ptr(), out, n);
        let failed = grid.failed.iter().filter(|f| **f).count();
        if failed > 0 {
            return Err((FsStatus::NonConvergence, format!("solver failed at {failed} of {n} points")));
        }
        Ok(())
    })
}
