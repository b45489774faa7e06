use std::ffi::{CStr, CString};
use std::ptr;

use kipp::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(kipp_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn jordan_polynomial_through_handles() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(kipp_jordan_shift(2, &mut m), KippStatus::Ok);
        assert_eq!(kipp_matrix_dim(m), 2);
        let mut p = ptr::null_mut();
        assert_eq!(kipp_poly_det(m, &mut p), KippStatus::Ok);
        assert_eq!(kipp_poly_degree(p), 2);
        assert_eq!(kipp_poly_coeff(p, 0, 0, 2), 1.0);
        assert!((kipp_poly_coeff(p, 2, 0, 0) + 0.25).abs() < 1e-14);
        assert_eq!(kipp_poly_coeff(p, 1, 0, 0), 0.0);

        let mut s = ptr::null_mut();
        assert_eq!(kipp_poly_to_json(p, &mut s), KippStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        assert!(text.contains("\"degree\":2"));
        kipp_string_free(s);
        kipp_poly_free(p);
        kipp_matrix_free(m);
    }
}

#[test]
fn matrix_from_arrays_and_json() {
    let re = [1.0, 2.0, 0.0, -1.0];
    let im = [0.0, 0.5, 0.0, 0.0];
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(kipp_matrix_new(2, re.as_ptr(), im.as_ptr(), &mut m), KippStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(kipp_matrix_get(m, 0, 1, &mut a, &mut b), KippStatus::Ok);
        assert_eq!((a, b), (2.0, 0.5));
        assert_eq!(kipp_matrix_get(m, 2, 0, &mut a, &mut b), KippStatus::InvalidArgument);

        let mut s = ptr::null_mut();
        assert_eq!(kipp_matrix_to_json(m, &mut s), KippStatus::Ok);
        let mut m2 = ptr::null_mut();
        assert_eq!(kipp_matrix_from_json(s, &mut m2), KippStatus::Ok);
        assert_eq!(kipp_matrix_get(m2, 0, 1, &mut a, &mut b), KippStatus::Ok);
        assert_eq!((a, b), (2.0, 0.5));
        kipp_string_free(s);
        kipp_matrix_free(m);
        kipp_matrix_free(m2);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(kipp_jordan_shift(1, &mut m), KippStatus::InvalidArgument);
        assert!(m.is_null());
        assert!(last_error().contains("n >= 2"));

        let bad = CString::new("{\"dim\":2,\"entries\":[[1,0]]}").unwrap();
        assert_eq!(kipp_matrix_from_json(bad.as_ptr(), &mut m), KippStatus::InvalidArgument);
        assert!(!last_error().is_empty());

        assert_eq!(kipp_matrix_from_json(ptr::null(), &mut m), KippStatus::NullPointer);
        assert_eq!(kipp_s5_family(1.5, 0.0, 0.0, 0.0, 0.0, &mut m), KippStatus::InvalidArgument);

        assert_eq!(kipp_jordan_shift(3, &mut m), KippStatus::Ok);
        assert_eq!(last_error(), "");
        let mut s = ptr::null_mut();
        assert_eq!(kipp_classify_json(m, 1e-8, 48, &mut s), KippStatus::Precondition);
        assert!(last_error().contains("5x5"));
        kipp_matrix_free(m);
        kipp_matrix_free(ptr::null_mut());
        assert_eq!(kipp_matrix_dim(ptr::null()), 0);
    }
}

#[test]
fn disc_fit_support_and_partial_isometry() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(kipp_s5_family(0.0, 0.0, 0.0, 0.0, 0.0, &mut m), KippStatus::Ok);
        let mut fit = KippDiscFit::default();
        assert_eq!(kipp_fit_disc(m, 240, &mut fit), KippStatus::Ok);
        assert!((fit.radius - 0.75f64.sqrt()).abs() < 1e-10);
        assert!(fit.center_re.hypot(fit.center_im) < 1e-10);
        assert_eq!(kipp_fit_disc(m, 4, &mut fit), KippStatus::InvalidArgument);

        let mut h = 0.0;
        assert_eq!(kipp_support_function(m, 0.3, &mut h), KippStatus::Ok);
        assert!((h - 0.75f64.sqrt()).abs() < 1e-12);

        let mut pi = false;
        assert_eq!(kipp_is_partial_isometry(m, 1e-12, &mut pi), KippStatus::Ok);
        assert!(pi);

        let mut s = ptr::null_mut();
        assert_eq!(kipp_classify_json(m, 1e-8, 240, &mut s), KippStatus::Ok);
        let v: String = CStr::from_ptr(s).to_str().unwrap().to_owned();
        assert!(v.contains("\"components\"") && v.contains("\"discFit\""));
        kipp_string_free(s);
        kipp_matrix_free(m);
    }
}

#[test]
fn seeded_partial_isometry_is_reproducible() {
    unsafe {
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(kipp_random_partial_isometry(5, 2, 7, &mut a), KippStatus::Ok);
        assert_eq!(kipp_random_partial_isometry(5, 2, 7, &mut b), KippStatus::Ok);
        let (mut x, mut y, mut u, mut v) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..5 {
            for j in 0..5 {
                kipp_matrix_get(a, i, j, &mut x, &mut y);
                kipp_matrix_get(b, i, j, &mut u, &mut v);
                assert_eq!((x, y), (u, v));
            }
        }
        assert_eq!(kipp_random_partial_isometry(5, 6, 7, &mut a), KippStatus::InvalidArgument);
        kipp_matrix_free(a);
        kipp_matrix_free(b);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/kipp.h")).unwrap();
    for name in [
        "kipp_matrix_new",
        "kipp_matrix_from_json",
        "kipp_matrix_free",
        "kipp_poly_det",
        "kipp_poly_coeff",
        "kipp_fit_disc",
        "kipp_classify_json",
        "kipp_last_error",
        "KIPP_STATUS_OK",
        "typedef struct KippMatrix KippMatrix",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
