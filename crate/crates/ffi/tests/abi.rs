use std::ffi::{CStr, CString};
use std::ptr;

use dwshell_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        dw_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn matrix(n: usize, re_im: &[f64]) -> *mut DwMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { dw_matrix_new(n, re_im.as_ptr(), &mut m) }, DwStatus::Ok);
    m
}

#[test]
fn identity_shell_points() {
    let m = matrix(2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    unsafe {
        assert_eq!(dw_matrix_dim(m), 2);
        let mut written = 0;
        // Too small first: the call reports the needed length.
        assert_eq!(dw_shell_boundary(m, 20, ptr::null_mut(), 0, &mut written), DwStatus::BufferTooSmall);
        assert_eq!(written, 60);
        let mut buf = vec![0.0; written];
        assert_eq!(dw_shell_boundary(m, 20, buf.as_mut_ptr(), buf.len(), &mut written), DwStatus::Ok);
        for p in buf.chunks(3) {
            assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12 && (p[2] - 1.0).abs() < 1e-12);
        }
        dw_matrix_free(m);
    }
}

#[test]
fn invalid_inputs_set_codes_and_messages() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(dw_matrix_new(2, ptr::null(), &mut m), DwStatus::NullPointer);
        assert!(last_error().contains("null"));
        let nan = [f64::NAN, 0.0];
        assert_eq!(dw_matrix_new(1, nan.as_ptr(), &mut m), DwStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        let a = matrix(1, &[1.0, 0.0]);
        let b = matrix(2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let mut v = ptr::null_mut();
        let c = CString::new("dw_separation").unwrap();
        assert_eq!(dw_check_condition(a, b, c.as_ptr(), 32, &mut v), DwStatus::DimensionMismatch);
        let bad = CString::new("nope").unwrap();
        assert_eq!(dw_check_condition(a, a, bad.as_ptr(), 32, &mut v), DwStatus::InvalidArgument);
        dw_matrix_free(a);
        dw_matrix_free(b);
        dw_matrix_free(ptr::null_mut());
        assert_eq!(dw_verdict_status(ptr::null()), DwVerdictStatus::Undecided);
    }
}

#[test]
fn example1_phase_condition_and_nilpotent_phases() {
    let (c, s) = ((-0.75 * std::f64::consts::PI).cos(), (-0.75 * std::f64::consts::PI).sin());
    let a = matrix(2, &[0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let b = matrix(2, &[c, s, 0.0, 0.0, 0.0, 0.0, c, s]);
    unsafe {
        let mut v = ptr::null_mut();
        let id = CString::new("theta_srg_phase").unwrap();
        assert_eq!(dw_check_condition(a, b, id.as_ptr(), 64, &mut v), DwStatus::Ok);
        assert_eq!(dw_verdict_status(v), DwVerdictStatus::Separated);
        let mut t = 0.0;
        assert!(dw_verdict_witness_theta(v, &mut t));
        assert!((t - std::f64::consts::FRAC_PI_4).abs() < 1e-6);
        let mut need = 0;
        assert_eq!(dw_verdict_json(v, ptr::null_mut(), 0, &mut need), DwStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; need];
        assert_eq!(dw_verdict_json(v, buf.as_mut_ptr(), need, &mut need), DwStatus::Ok);
        let json = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(json.contains("\"status\":\"separated\""));
        dw_verdict_free(v);

        let id = CString::new("sectorial_phase").unwrap();
        assert_eq!(dw_check_condition(a, b, id.as_ptr(), 64, &mut v), DwStatus::Ok);
        assert!(dw_verdict_violated(v));
        dw_verdict_free(v);

        let nil = matrix(2, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let (mut lo, mut hi) = (1.0, 0.0);
        assert_eq!(dw_theta_srg_phases(nil, 0.3, &mut lo, &mut hi), DwStatus::Ok);
        assert!(lo.abs() < 1e-9 && (hi - std::f64::consts::PI).abs() < 1e-9);
        dw_matrix_free(nil);
        dw_matrix_free(a);
        dw_matrix_free(b);
    }
}

#[test]
fn static_loops_through_stability_api() {
    let half = [0.5, 0.0, 0.0, 0.5];
    let one = [1.0, 0.0, 0.0, 1.0];
    let minus = [-1.0, 0.0, 0.0, -1.0];
    let sys = |d: &[f64]| {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { dw_system_new(0, 2, 2, ptr::null(), ptr::null(), ptr::null(), d.as_ptr(), &mut s) }, DwStatus::Ok);
        s
    };
    let (g, h, n) = (sys(&half), sys(&one), sys(&minus));
    let omegas = [0.0, 1.0, 10.0];
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(dw_stability(g, h, DwMethod::Dw, omegas.as_ptr(), 3, true, 5, 64, &mut r), DwStatus::Ok);
        assert_eq!(dw_stability_report_overall(r), DwOverall::Certified);
        assert_eq!(dw_stability_report_len(r), 4);
        dw_stability_report_free(r);
        assert_eq!(dw_stability(h, n, DwMethod::GainPhase, omegas.as_ptr(), 3, true, 5, 64, &mut r), DwStatus::Ok);
        assert_eq!(dw_stability_report_overall(r), DwOverall::Counterexample);
        dw_stability_report_free(r);

        let mut ny = ptr::null_mut();
        assert_eq!(dw_nyquist(g, h, omegas.as_ptr(), 3, true, &mut ny), DwStatus::Ok);
        assert!((dw_nyquist_min_distance(ny) - 1.5).abs() < 1e-12);
        assert_eq!(dw_nyquist_winding(ny), 0);
        dw_nyquist_report_free(ny);

        let bad = [1.0, 0.0];
        assert_eq!(dw_stability(g, h, DwMethod::Dw, bad.as_ptr(), 2, true, 5, 64, &mut r), DwStatus::InvalidArgument);

        dw_system_free(g);
        dw_system_free(h);
        dw_system_free(n);
    }
}

#[test]
fn unstable_component_is_reported() {
    let (a, b, c, d) = ([1.0], [1.0], [1.0], [0.0]);
    let k = [1.0];
    unsafe {
        let mut u = ptr::null_mut();
        assert_eq!(dw_system_new(1, 1, 1, a.as_ptr(), b.as_ptr(), c.as_ptr(), d.as_ptr(), &mut u), DwStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(dw_system_new(0, 1, 1, ptr::null(), ptr::null(), ptr::null(), k.as_ptr(), &mut s), DwStatus::Ok);
        let omegas = [0.0];
        let mut r = ptr::null_mut();
        assert_eq!(dw_stability(u, s, DwMethod::Dw, omegas.as_ptr(), 1, false, 3, 32, &mut r), DwStatus::Unstable);
        assert!(last_error().contains("spectral abscissa"));
        dw_system_free(u);
        dw_system_free(s);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(dw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
