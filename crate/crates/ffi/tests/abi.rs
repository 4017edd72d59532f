use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use blowup_lab_ffi::*;

fn last_error() -> String {
    let p = bl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solution_round_trip() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            bl_solution_new(BlFamily::BornInfeldLog, 1.0, 0.2, &mut h),
            BlStatus::Ok
        );
        let mut v = f64::NAN;
        assert_eq!(bl_solution_value(h, 0.5, 0.0, &mut v), BlStatus::Ok);
        assert_eq!(v, 0.0);
        let mut j = BlJet::default();
        assert_eq!(bl_solution_jet(h, 0.5, 0.0, &mut j), BlStatus::Ok);
        assert!((j.db - 0.8).abs() < 1e-12);
        let mut r = f64::NAN;
        assert_eq!(
            bl_solution_residual(h, BlEquation::BornInfeld, 0.3, 0.1, &mut r),
            BlStatus::Ok
        );
        assert!(r.abs() < 1e-9);
        assert_eq!(bl_solution_value(h, 0.9, 0.2, &mut v), BlStatus::Domain);
        assert!(last_error().contains("domain"));
        bl_solution_free(h);
    }
}

#[test]
fn membrane_axis_and_bad_arguments() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            bl_solution_new(BlFamily::SpherePlus, 1.0, 0.0, &mut h),
            BlStatus::Ok
        );
        let mut r = f64::NAN;
        assert_eq!(
            bl_solution_residual(h, BlEquation::RadialMembrane, 0.2, 0.0, &mut r),
            BlStatus::Ok
        );
        assert!(r.abs() < 1e-9);
        assert_eq!(
            bl_solution_residual(h, BlEquation::Eikonal, 0.2, 0.3, ptr::null_mut()),
            BlStatus::NullPointer
        );
        bl_solution_free(h);
        let mut bad = ptr::null_mut();
        assert_eq!(
            bl_solution_new(BlFamily::BornInfeldLog, -1.0, 0.2, &mut bad),
            BlStatus::InvalidArgument
        );
        assert!(bad.is_null());
        bl_solution_free(ptr::null_mut());
    }
}

#[test]
fn evolution_lifecycle() {
    let cfg =
        CString::new("equation=born-infeld\nk=0.2\nn=200\nt_end=0.3\ndissipation=0\n").unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(bl_evolution_new(cfg.as_ptr(), &mut h), BlStatus::Ok);
        let mut t = 0.0;
        assert_eq!(
            bl_evolution_summary(h, &mut t, ptr::null_mut(), ptr::null_mut()),
            BlStatus::NotRun
        );
        assert_eq!(bl_evolution_run(h), BlStatus::Ok);
        let (mut steps, mut err) = (0usize, f64::NAN);
        assert_eq!(
            bl_evolution_summary(h, &mut t, &mut steps, &mut err),
            BlStatus::Ok
        );
        assert!(
            (t - 0.3).abs() < 1e-12 && steps > 0 && err < 1e-4,
            "{t} {steps} {err}"
        );
        let mut len = 0usize;
        assert_eq!(
            bl_evolution_copy_u(h, ptr::null_mut(), 0, &mut len),
            BlStatus::Ok
        );
        let mut buf = vec![0.0; len];
        assert_eq!(
            bl_evolution_copy_u(h, buf.as_mut_ptr(), len, &mut len),
            BlStatus::Ok
        );
        assert!(buf.iter().all(|v| v.is_finite()));
        let mut drift = f64::NAN;
        assert_eq!(bl_evolution_momentum_drift(h, &mut drift), BlStatus::Ok);
        assert!(drift < 1e-4);
        bl_evolution_free(h);
    }
}

#[test]
fn config_errors_carry_the_line() {
    let cfg = CString::new("equation=born-infeld\nn=oops\n").unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(bl_evolution_new(cfg.as_ptr(), &mut h), BlStatus::Config);
        assert!(h.is_null());
        assert!(last_error().contains("line 2"), "{}", last_error());
    }
}

#[test]
fn mode_roots_and_audit() {
    unsafe {
        let mut r = [0.0; 2];
        assert_eq!(bl_mode_roots(r.as_mut_ptr()), BlStatus::Ok);
        assert_eq!(r, [1.0, -4.0]);
        let mut s = ptr::null_mut();
        let mut ok = -1;
        assert_eq!(bl_audit_json(&mut s, &mut ok), BlStatus::Ok);
        assert_eq!(ok, 1);
        let json = CStr::from_ptr(s).to_str().unwrap().to_owned();
        bl_string_free(s);
        assert!(json.contains("\"all_expected\": true"));
        assert!(!json.contains("NaN"));
    }
}

#[test]
fn header_is_valid_c() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/blowup_lab.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for sym in [
        "bl_solution_new",
        "bl_evolution_run",
        "bl_audit_json",
        "bl_last_error_message",
        "BL_STATUS_OK",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99", "-Wall", "-Werror"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler on PATH; syntax check skipped");
        return;
    };
    assert!(status.success());
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "blowup_lab.h"

int main(void) {
    BlSolution *s = NULL;
    if (bl_solution_new(BL_FAMILY_BORN_INFELD_LOG, 1.0, 0.2, &s) != BL_STATUS_OK) return 3;
    BlJet j;
    if (bl_solution_jet(s, 0.5, 0.0, &j) != BL_STATUS_OK) return 4;
    double v;
    BlStatus st = bl_solution_value(s, 2.0, 0.0, &v);
    if (st != BL_STATUS_DOMAIN || bl_last_error_message() == NULL) return 5;
    bl_solution_free(s);
    double roots[2];
    bl_mode_roots(roots);
    printf("%.3f %.1f %.1f\n", j.db, roots[0], roots[1]);
    return 0;
}
"#;

#[test]
fn links_from_c() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libblowup_lab_ffi.a");
    if !lib.exists() {
        eprintln!(
            "static library not at {}; link check skipped",
            lib.display()
        );
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = tmp.path().join("main");
    let include = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let Ok(status) = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
    else {
        eprintln!("no C compiler on PATH; link check skipped");
        return;
    };
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{out:?}");
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "0.800 1.0 -4.0"
    );
}
