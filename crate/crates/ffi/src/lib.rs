//! C ABI over `kipp-core`.
//!
//! Matrices and polynomials are opaque heap handles released with their
//! `_free` function. Every fallible call returns a [`KippStatus`]; on failure
//! [`kipp_last_error`] describes the error for the calling thread. Strings
//! returned by the library are released with [`kipp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use kipp_core::classify::{classify, fit_disc};
use kipp_core::generators;
use kipp_core::kippenhahn::{self, support_function};
use kipp_core::linalg::is_partial_isometry;
use kipp_core::{ComplexMatrix, HomoPoly3, KippError, C64};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KippStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed input or an argument outside its domain.
    InvalidArgument = 2,
    /// Valid input that violates a precondition (wrong shape, not a partial isometry, ...).
    Precondition = 3,
    Panic = 4,
}

/// Opaque complex square matrix.
pub struct KippMatrix(ComplexMatrix);

/// Opaque homogeneous polynomial in `x, y, z`.
pub struct KippPoly(HomoPoly3);

/// Disc fit of the support function: `h(theta) = radius + Re(e^{-i theta} center)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KippDiscFit {
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("no interior nul"));
}

fn from_error(e: KippError) -> KippStatus {
    set_error(&e.to_string());
    if e.exit_code() == 2 {
        KippStatus::InvalidArgument
    } else {
        KippStatus::Precondition
    }
}

fn guard<F: FnOnce() -> KippStatus>(f: F) -> KippStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == KippStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => {
            set_error("internal panic");
            KippStatus::Panic
        }
    }
}

fn null_error(name: &str) -> KippStatus {
    set_error(&format!("{name} is null"));
    KippStatus::NullPointer
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn string_out(out: *mut *mut c_char, s: String) -> KippStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            KippStatus::Ok
        }
        Err(_) => {
            set_error("string contains an interior nul");
            KippStatus::Panic
        }
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn kipp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a `dim x dim` matrix from row-major real and imaginary parts.
///
/// # Safety
/// `re` and `im` must point to `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_matrix_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut KippMatrix,
) -> KippStatus {
    guard(|| {
        if re.is_null() || im.is_null() || out.is_null() {
            return null_error("argument");
        }
        if dim == 0 {
            return from_error(KippError::InvalidArgument("dimension must be positive".into()));
        }
        let re = std::slice::from_raw_parts(re, dim * dim);
        let im = std::slice::from_raw_parts(im, dim * dim);
        let entries: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        match ComplexMatrix::from_row_slice(dim, &entries) {
            Ok(m) => {
                store(out, KippMatrix(m));
                KippStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parses the shared JSON matrix format.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_matrix_from_json(json: *const c_char, out: *mut *mut KippMatrix) -> KippStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return null_error("argument");
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return from_error(KippError::Input("matrix JSON is not UTF-8".into())),
        };
        match ComplexMatrix::from_json(text) {
            Ok(m) => {
                store(out, KippMatrix(m));
                KippStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Serializes a matrix to the shared JSON format.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_matrix_to_json(m: *const KippMatrix, out: *mut *mut c_char) -> KippStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return null_error("argument");
        }
        string_out(out, (*m).0.to_json())
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kipp_matrix_free(m: *mut KippMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of a matrix; 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kipp_matrix_dim(m: *const KippMatrix) -> usize {
    if m.is_null() {
        0
    } else {
        (*m).0.dim()
    }
}

/// Reads entry `(i, j)`.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_matrix_get(
    m: *const KippMatrix,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> KippStatus {
    guard(|| {
        if m.is_null() || re.is_null() || im.is_null() {
            return null_error("argument");
        }
        let n = (*m).0.dim();
        if i >= n || j >= n {
            return from_error(KippError::InvalidArgument(format!("index ({i}, {j}) out of range for dim {n}")));
        }
        let z = (*m).0.get(i, j);
        *re = z.re;
        *im = z.im;
        KippStatus::Ok
    })
}

unsafe fn matrix_out(out: *mut *mut KippMatrix, r: kipp_core::Result<ComplexMatrix>) -> KippStatus {
    if out.is_null() {
        return null_error("out");
    }
    match r {
        Ok(m) => {
            store(out, KippMatrix(m));
            KippStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Ones on the superdiagonal, `n >= 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_jordan_shift(n: usize, out: *mut *mut KippMatrix) -> KippStatus {
    guard(|| matrix_out(out, generators::jordan_shift(n)))
}

/// The `S_5` partial isometry with eigenvalues `{a, a, 0, b, c}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_s5_family(
    a: f64,
    b_re: f64,
    b_im: f64,
    c_re: f64,
    c_im: f64,
    out: *mut *mut KippMatrix,
) -> KippStatus {
    guard(|| matrix_out(out, generators::s5_family(a, C64::new(b_re, b_im), C64::new(c_re, c_im))))
}

/// Seeded random `n x n` partial isometry with kernel dimension `m`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_random_partial_isometry(
    n: usize,
    m: usize,
    seed: u64,
    out: *mut *mut KippMatrix,
) -> KippStatus {
    guard(|| matrix_out(out, generators::random_partial_isometry(n, m, seed)))
}

/// Kippenhahn polynomial `det(x Re A + y Im A + z I)`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_poly_det(m: *const KippMatrix, out: *mut *mut KippPoly) -> KippStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return null_error("argument");
        }
        match kippenhahn::kipp_poly_det(&(*m).0) {
            Ok(p) => {
                store(out, KippPoly(p));
                KippStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kipp_poly_free(p: *mut KippPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Total degree; 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kipp_poly_degree(p: *const KippPoly) -> usize {
    if p.is_null() {
        0
    } else {
        (*p).0.degree()
    }
}

/// Coefficient of `x^i y^j z^k`; 0 when `i + j + k` differs from the degree.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kipp_poly_coeff(p: *const KippPoly, i: usize, j: usize, k: usize) -> f64 {
    if p.is_null() {
        return 0.0;
    }
    (*p).0.coeff(i, j, k)
}

/// Serializes a polynomial to its JSON term list.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_poly_to_json(p: *const KippPoly, out: *mut *mut c_char) -> KippStatus {
    guard(|| {
        if p.is_null() || out.is_null() {
            return null_error("argument");
        }
        string_out(out, (*p).0.to_json())
    })
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kipp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Support function: largest eigenvalue of `Re(e^{-i theta} A)`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_support_function(m: *const KippMatrix, theta: f64, out: *mut f64) -> KippStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return null_error("argument");
        }
        *out = support_function(&(*m).0, theta);
        KippStatus::Ok
    })
}

/// Least-squares disc fit of the support function over `samples` angles.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_fit_disc(m: *const KippMatrix, samples: usize, out: *mut KippDiscFit) -> KippStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return null_error("argument");
        }
        match fit_disc(&(*m).0, samples) {
            Ok(f) => {
                *out = KippDiscFit {
                    center_re: f.center.re,
                    center_im: f.center.im,
                    radius: f.radius,
                    residual: f.residual,
                };
                KippStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Whether `‖A A* A - A‖_F <= tol`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_is_partial_isometry(m: *const KippMatrix, tol: f64, out: *mut bool) -> KippStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return null_error("argument");
        }
        *out = is_partial_isometry(&(*m).0, tol);
        KippStatus::Ok
    })
}

/// Curve classification of a 5x5 matrix with disc fit and condition
/// reports, as JSON.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kipp_classify_json(
    m: *const KippMatrix,
    tol: f64,
    samples: usize,
    out: *mut *mut c_char,
) -> KippStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return null_error("argument");
        }
        match classify(&(*m).0, tol, samples) {
            Ok(c) => string_out(out, c.to_json()),
            Err(e) => from_error(e),
        }
    })
}
