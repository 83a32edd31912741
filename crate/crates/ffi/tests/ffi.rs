use std::ffi::{c_char, CStr};
use std::ptr;

use hdecert_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { hdecert_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn spectrum(values: &[f64]) -> *mut HdecertSpectrum {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hdecert_spectrum_new(values.as_ptr(), values.len(), &mut s) }, HdecertStatus::Ok);
    s
}

#[test]
fn spectrum_lifecycle() {
    let s = spectrum(&[0.2, 0.6, 0.2]);
    unsafe {
        assert_eq!(hdecert_spectrum_dim(s), 3);
        let mut v = [0.0; 3];
        assert_eq!(hdecert_spectrum_values(s, v.as_mut_ptr(), 3), 3);
        assert_eq!(v, [0.6, 0.2, 0.2]);
        let mut e = 0.0;
        assert_eq!(hdecert_e_r(s, 2, &mut e), HdecertStatus::Ok);
        assert!((e - 0.2).abs() < 1e-15);
        let mut b = HdecertBounds::default();
        assert_eq!(hdecert_bounds_rank(s, 2, &mut b), HdecertStatus::Ok);
        let g = 0.12f64.sqrt();
        assert!((b.psep_h - (0.8 + g) / (1.0 + g)).abs() < 1e-12);
        assert!(b.psep_lb <= b.psep_h && b.psep_h <= b.plc_ub);
        hdecert_spectrum_free(s);
        hdecert_spectrum_free(ptr::null_mut());
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut s = ptr::null_mut();
        let bad = [0.5, 0.7];
        assert_eq!(hdecert_spectrum_new(bad.as_ptr(), 2, &mut s), HdecertStatus::InvalidArgument);
        assert!(s.is_null());
        assert!(last_error().contains("sum"));

        assert_eq!(hdecert_spectrum_new(ptr::null(), 2, &mut s), HdecertStatus::NullPointer);
        assert!(last_error().contains("null"));

        let s = spectrum(&[1.0, 0.0]);
        let mut plan = HdecertPlan::default();
        assert_eq!(hdecert_plan(s, 1, 0.0, 0.01, HdecertStrategy::SepH, &mut plan), HdecertStatus::Infeasible);
        assert_eq!(hdecert_e_r(s, 5, &mut 0.0), HdecertStatus::InvalidArgument);
        assert_eq!(hdecert_e_r(s, 1, ptr::null_mut()), HdecertStatus::NullPointer);
        hdecert_spectrum_free(s);

        let mut buf = [0 as c_char; 4];
        let need = hdecert_last_error(buf.as_mut_ptr(), buf.len());
        assert!(need > 4);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 3);
    }
}

#[test]
fn planning() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(hdecert_spectrum_uniform(9, &mut s), HdecertStatus::Ok);
        let mut plan = HdecertPlan::default();
        assert_eq!(hdecert_plan(s, 1, 0.0, 0.01, HdecertStrategy::Opt, &mut plan), HdecertStatus::Ok);
        assert_eq!(plan.tests_required, 3);
        assert!((plan.separation_probability - 0.2).abs() < 1e-12);
        hdecert_spectrum_free(s);

        let mut p = 0.0;
        assert_eq!(hdecert_sep_prob_mes_rank(4, 1, &mut p), HdecertStatus::Ok);
        assert_eq!(p, 0.4);
        let mut n = 0;
        assert_eq!(hdecert_tests_required(0.5, 0.01, &mut n), HdecertStatus::Ok);
        assert_eq!(n, 7);
    }
}

#[test]
fn operators() {
    unsafe {
        let s = spectrum(&[0.5, 0.5]);
        let mut op = ptr::null_mut();
        assert_eq!(hdecert_operator_opt(2, &mut op), HdecertStatus::Ok);
        assert_eq!(hdecert_operator_dim(op), 4);
        let mut gap = HdecertSpectralGap::default();
        assert_eq!(hdecert_operator_spectral_gap(op, s, &mut gap), HdecertStatus::Ok);
        assert!((gap.beta - 1.0 / 3.0).abs() < 1e-10);

        let (mut re, mut im) = ([0.0; 16], [0.0; 16]);
        assert_eq!(hdecert_operator_entries(op, re.as_mut_ptr(), im.as_mut_ptr(), 16), HdecertStatus::Ok);
        let trace: f64 = (0..4).map(|i| re[i * 5]).sum();
        assert!((trace - 2.0).abs() < 1e-12);
        assert!(im.iter().all(|x| x.abs() < 1e-12));
        assert_eq!(
            hdecert_operator_entries(op, re.as_mut_ptr(), im.as_mut_ptr(), 8),
            HdecertStatus::InvalidArgument
        );
        hdecert_operator_free(op);

        for make in [hdecert_operator_sep_h, hdecert_operator_lc_h, hdecert_operator_mub] {
            let mut op = ptr::null_mut();
            assert_eq!(make(s, &mut op), HdecertStatus::Ok);
            assert_eq!(hdecert_operator_dim(op), 4);
            hdecert_operator_free(op);
        }
        hdecert_spectrum_free(s);

        assert_eq!(hdecert_operator_two_qubit(0.3, 0.5, &mut op), HdecertStatus::Ok);
        hdecert_operator_free(op);
        assert_eq!(hdecert_operator_two_qubit(2.0, 0.5, &mut op), HdecertStatus::InvalidArgument);
    }
}

#[test]
fn two_qubit() {
    let mut p = 0.0;
    assert_eq!(unsafe { hdecert_two_qubit_sep_prob(std::f64::consts::FRAC_PI_4, &mut p) }, HdecertStatus::Ok);
    assert!((p - 2.0 / 3.0).abs() < 1e-12);
    let t = hdecert_theta_star();
    assert!(t > 0.0 && t < std::f64::consts::FRAC_PI_4);
    let v = unsafe { CStr::from_ptr(hdecert_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/hdecert.h");
    assert!(std::path::Path::new(header).exists());
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler, skipping header check");
        return;
    };
    assert!(status.success());
}
