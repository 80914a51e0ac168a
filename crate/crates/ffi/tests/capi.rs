use std::ffi::{CStr, CString};
use std::ptr;

use filtered_spectra_ffi::*;

const ONE: &str = r#"{"type":"kernel","breakpoints":["0","1"],"coeffs":[[0,0,0,0,"1","0"]]}"#;
const COMPASS: &str = r#"{"type":"filter","entries":[[-1,-1,"1/2"],[-1,1,"1/2"],[1,-1,"1/2"],[1,1,"1/2"]]}"#;

fn load(doc: &str) -> *mut FsKernel {
    let c = CString::new(doc).unwrap();
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { fs_kernel_from_json(c.as_ptr(), &mut k) }, FsStatus::Ok);
    assert!(!k.is_null());
    k
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fs_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn semicircle_through_the_c_api() {
    let k = load(ONE);
    unsafe {
        assert!((fs_kernel_a_bound(k) - 2.0).abs() < 1e-15);

        let mut m = [f64::NAN; 6];
        assert_eq!(fs_theoretical_moments(k, 6, m.as_mut_ptr(), m.len()), FsStatus::Ok);
        assert_eq!(m, [0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);

        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(fs_stieltjes(k, 3.0, 0.0, &mut re, &mut im), FsStatus::Ok);
        assert!((re - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(im.abs() < 1e-15);

        let xs = [-1.0, 0.0, 1.0];
        let mut f = [0.0; 3];
        assert_eq!(fs_density(k, xs.as_ptr(), 3, 1e-2, 5e-3, f.as_mut_ptr()), FsStatus::Ok);
        for (x, v) in xs.iter().zip(f) {
            assert!((v - (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI)).abs() < 1e-3);
        }
        fs_kernel_free(k);
    }
}

#[test]
fn compass_filter_moments() {
    let k = load(COMPASS);
    unsafe {
        assert!((fs_kernel_a_bound(k) - 4.0).abs() < 1e-15);
        let mut m = [0.0; 4];
        assert_eq!(fs_theoretical_moments(k, 4, m.as_mut_ptr(), 4), FsStatus::Ok);
        assert_eq!(m, [0.0, 1.0, 0.0, 3.0]);
        fs_kernel_free(k);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut k = ptr::null_mut();
        let bad = CString::new("{not json").unwrap();
        assert_eq!(fs_kernel_from_json(bad.as_ptr(), &mut k), FsStatus::Parse);
        assert!(k.is_null());
        assert!(!last_error().is_empty());

        let negative = CString::new(
            r#"{"type":"kernel","breakpoints":["0","1"],"coeffs":[[0,0,0,0,"1","0"],[2,0,0,0,"1","0"],[-2,0,0,0,"1","0"]]}"#,
        )
        .unwrap();
        assert_eq!(fs_kernel_from_json(negative.as_ptr(), &mut k), FsStatus::KernelInvalid);

        assert_eq!(fs_kernel_from_json(ptr::null(), &mut k), FsStatus::NullPointer);

        let k = load(ONE);
        let mut m = [0.0; 2];
        assert_eq!(fs_theoretical_moments(k, 4, m.as_mut_ptr(), 2), FsStatus::BufferTooSmall);
        assert!(last_error().contains('4'));

        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(fs_stieltjes(k, 1.0, 0.0, &mut re, &mut im), FsStatus::InvalidInput);
        assert_eq!(fs_stieltjes(k, 3.0, 0.0, ptr::null_mut(), &mut im), FsStatus::NullPointer);
        fs_kernel_free(k);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(fs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
