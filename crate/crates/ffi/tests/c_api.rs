use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use dynvar_ffi::*;

fn fixture(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = dynvar_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn dephasing_through_handles() {
    // omega = 1/2, column-major interleaved
    let omega = [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0];
    let mut state = ptr::null_mut();
    assert_eq!(unsafe { dynvar_state_new(2, omega.as_ptr(), &mut state) }, DynvarStatus::Ok);
    assert_eq!(unsafe { dynvar_state_dim(state) }, 2);

    // Δ = ad(p)² with p = diag(i, −i): off-diagonal units decay at rate 4
    let mut l = [0.0f64; 32];
    for (k, rate) in [(1usize, -4.0), (2, -4.0)] {
        l[2 * (k * 4 + k)] = rate;
    }
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { dynvar_generator_new(state, l.as_ptr(), &mut g) }, DynvarStatus::Ok);

    let mut flag = false;
    assert_eq!(unsafe { dynvar_is_elliptic(g, &mut flag) }, DynvarStatus::Ok);
    assert!(flag);
    assert_eq!(unsafe { dynvar_is_exact(g, &mut flag) }, DynvarStatus::Ok);
    assert!(flag);

    let mut inv = ptr::null_mut();
    assert_eq!(unsafe { dynvar_extract(g, &mut inv) }, DynvarStatus::Ok);
    assert_eq!(unsafe { dynvar_invariant_momentum_dim(inv) }, 1);
    assert_eq!(unsafe { dynvar_invariant_n(inv) }, 2);
    let mut p = [0.0f64; 8];
    assert_eq!(unsafe { dynvar_invariant_momentum(inv, 0, p.as_mut_ptr(), 8) }, DynvarStatus::Ok);
    // p = ±diag(i, −i)
    assert!((p[1].abs() - 1.0).abs() < 1e-9 && (p[7] + p[1]).abs() < 1e-9);
    assert_eq!(
        unsafe { dynvar_invariant_momentum(inv, 1, p.as_mut_ptr(), 8) },
        DynvarStatus::InvalidArgument
    );
    let mut v = [1.0f64; 8];
    assert_eq!(unsafe { dynvar_invariant_potential(inv, v.as_mut_ptr(), 8) }, DynvarStatus::Ok);
    assert!(v.iter().all(|x| x.abs() < 1e-12));
    assert_eq!(
        unsafe { dynvar_invariant_potential(inv, v.as_mut_ptr(), 4) },
        DynvarStatus::BufferTooSmall
    );

    let mut phi = [0.0f64; 32];
    assert_eq!(unsafe { dynvar_evolve(g, 0.5, phi.as_mut_ptr(), 32) }, DynvarStatus::Ok);
    assert!((phi[2 * 5] - (-2.0f64).exp()).abs() < 1e-12);
    assert_eq!(unsafe { dynvar_evolve(g, -1.0, phi.as_mut_ptr(), 32) }, DynvarStatus::InvalidArgument);
    assert!(last_error().contains("negative time"));

    unsafe {
        dynvar_invariant_free(inv);
        dynvar_generator_free(g);
        dynvar_state_free(state);
    }
}

#[test]
fn error_codes() {
    let mut state = ptr::null_mut();
    let bad = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    assert_eq!(unsafe { dynvar_state_new(2, bad.as_ptr(), &mut state) }, DynvarStatus::InvalidArgument);
    assert!(last_error().contains("trace"));
    assert_eq!(unsafe { dynvar_state_new(2, ptr::null(), &mut state) }, DynvarStatus::NullPointer);

    let mut flag = false;
    assert_eq!(unsafe { dynvar_is_elliptic(ptr::null(), &mut flag) }, DynvarStatus::NullPointer);

    let mut g = ptr::null_mut();
    let missing = CString::new("/nonexistent/generator.json").unwrap();
    assert_eq!(
        unsafe { dynvar_generator_load(missing.as_ptr(), &mut g, ptr::null_mut()) },
        DynvarStatus::ParseError
    );

    // the cyclic-shift generator is elliptic but not exact
    let path = fixture("cyclic_shift_n3.json");
    assert_eq!(unsafe { dynvar_generator_load(path.as_ptr(), &mut g, ptr::null_mut()) }, DynvarStatus::Ok);
    let mut inv = ptr::null_mut();
    assert_eq!(unsafe { dynvar_extract(g, &mut inv) }, DynvarStatus::NotExact);
    unsafe { dynvar_generator_free(g) };

    unsafe {
        dynvar_state_free(ptr::null_mut());
        dynvar_generator_free(ptr::null_mut());
        dynvar_invariant_free(ptr::null_mut());
        dynvar_string_free(ptr::null_mut());
    }
}

#[test]
fn analyze_json_report() {
    let path = fixture("dephasing_n2.json");
    let mut out = ptr::null_mut();
    let mut code = -1;
    assert_eq!(unsafe { dynvar_analyze_json(path.as_ptr(), &mut out, &mut code) }, DynvarStatus::Ok);
    assert_eq!(code, 0);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { dynvar_string_free(out) };
    assert!(text.contains("\"exact\":true"));
    assert!(text.contains("\"limit_exists\":true"));
}

#[test]
fn load_returns_state() {
    let path = fixture("free_laplacian_n3.json");
    let mut g = ptr::null_mut();
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { dynvar_generator_load(path.as_ptr(), &mut g, &mut st) }, DynvarStatus::Ok);
    assert_eq!(unsafe { dynvar_state_dim(st) }, 3);
    let mut inv = ptr::null_mut();
    assert_eq!(unsafe { dynvar_extract(g, &mut inv) }, DynvarStatus::Ok);
    assert_eq!(unsafe { dynvar_invariant_momentum_dim(inv) }, 2);
    unsafe {
        dynvar_invariant_free(inv);
        dynvar_generator_free(g);
        dynvar_state_free(st);
    }
}
