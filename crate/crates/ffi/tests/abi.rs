use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ldlcert_ffi::*;

fn fixture(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    CString::new(std::fs::read_to_string(p).unwrap()).unwrap()
}

unsafe fn take(s: *mut c_char) -> serde_json::Value {
    let v = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
    ldlcert_string_free(s);
    v
}

unsafe fn last_error() -> String {
    CStr::from_ptr(ldlcert_last_error()).to_string_lossy().into_owned()
}

#[test]
fn measured_table_round_trip() {
    unsafe {
        let mut j = ptr::null_mut();
        assert_eq!(ldlcert_joint_from_json(fixture("measured.json").as_ptr(), &mut j), LdlcertStatus::Ok);
        let mut report = ptr::null_mut();
        let eta = [0.5, 0.1];
        assert_eq!(ldlcert_analyze_json(j, eta.as_ptr(), 2, &mut report), LdlcertStatus::Ok);
        let r = take(report);
        assert!((r["critical_ratio"].as_f64().unwrap() - 0.267).abs() < 1e-3);
        assert!((r["required_eta_min"]["0.1"].as_f64().unwrap() - 0.027).abs() < 1e-3);

        let mut b = ptr::null_mut();
        assert_eq!(ldlcert_behavior_from_joint(j, &mut b), LdlcertStatus::Ok);
        let mut p = 0.0;
        assert_eq!(ldlcert_behavior_get(b, [0, 0].as_ptr(), [0, 0].as_ptr(), 2, &mut p), LdlcertStatus::Ok);
        assert!((p - 0.01977 / 0.23573).abs() < 1e-12);
        let mut r = 0.0;
        assert_eq!(ldlcert_critical_ratio(b, &mut r), LdlcertStatus::Ok);
        assert!((r - 0.2674372).abs() < 1e-6);

        let mut report = ptr::null_mut();
        let s = ldlcert_membership_ldlps(b, 0.0, 1.0, ptr::null(), 0, false, &mut report);
        assert_eq!(s, LdlcertStatus::Ok);
        assert_eq!(take(report)["status"], "feasible");
        ldlcert_behavior_free(b);
        ldlcert_joint_free(j);
    }
}

#[test]
fn hardy_is_certified_nonlocal() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(ldlcert_hardy_behavior(&mut b), LdlcertStatus::Ok);
        for exact in [false, true] {
            let mut report = ptr::null_mut();
            let s = ldlcert_membership_ldlps(b, 0.1, 1.0, ptr::null(), 0, exact, &mut report);
            assert_eq!(s, LdlcertStatus::Infeasible);
            let r = take(report);
            assert_eq!(r["certificate"]["dual"].as_array().unwrap().len(), 17);
        }
        let eff = [0.5; 4];
        let mut report = ptr::null_mut();
        let s = ldlcert_membership_ldlps(b, 0.1, 1.0, eff.as_ptr(), 4, false, &mut report);
        assert_eq!(s, LdlcertStatus::Infeasible);
        ldlcert_string_free(report);
        ldlcert_behavior_free(b);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut j = ptr::null_mut();
        let bad = CString::new("{\"scenario\":").unwrap();
        assert_eq!(ldlcert_joint_from_json(bad.as_ptr(), &mut j), LdlcertStatus::InvalidData);
        assert!(j.is_null());
        assert!(last_error().contains("parse"));
        assert_eq!(ldlcert_joint_from_json(ptr::null(), &mut j), LdlcertStatus::NullPointer);
        // a conditional table is not a joint one
        assert_eq!(ldlcert_joint_from_json(fixture("hardy.json").as_ptr(), &mut j), LdlcertStatus::InvalidData);

        let mut b = ptr::null_mut();
        assert_eq!(ldlcert_behavior_from_json(fixture("deterministic.json").as_ptr(), &mut b), LdlcertStatus::Ok);
        let mut p = 0.0;
        let s = ldlcert_behavior_get(b, [2, 0].as_ptr(), [0, 0].as_ptr(), 2, &mut p);
        assert_eq!(s, LdlcertStatus::InvalidArgument);
        let s = ldlcert_behavior_get(b, [0, 0].as_ptr(), [0, 0].as_ptr(), 3, &mut p);
        assert_eq!(s, LdlcertStatus::InvalidArgument);
        let mut report = ptr::null_mut();
        let s = ldlcert_membership_ldlps(b, 0.9, 0.1, ptr::null(), 0, false, &mut report);
        assert_eq!(s, LdlcertStatus::InvalidArgument);
        assert!(report.is_null());
        let s = ldlcert_membership_ldlps(b, 0.1, 1.0, [0.5, 2.0, 0.5, 0.5].as_ptr(), 4, false, &mut report);
        assert_eq!(s, LdlcertStatus::InvalidArgument);
        let s = ldlcert_membership_ldlps(b, 0.1, 1.0, ptr::null(), 0, false, &mut report);
        assert_eq!(s, LdlcertStatus::Ok);
        ldlcert_string_free(report);
        assert_eq!(ldlcert_critical_ratio(ptr::null(), &mut p), LdlcertStatus::NullPointer);
        ldlcert_behavior_free(b);
        ldlcert_behavior_free(ptr::null_mut());
        ldlcert_string_free(ptr::null_mut());
    }
}

#[test]
fn header_matches_exports() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ldlcert.h")).unwrap();
    for f in [
        "ldlcert_last_error",
        "ldlcert_version",
        "ldlcert_string_free",
        "ldlcert_joint_from_json",
        "ldlcert_behavior_from_json",
        "ldlcert_behavior_from_joint",
        "ldlcert_hardy_behavior",
        "ldlcert_behavior_get",
        "ldlcert_critical_ratio",
        "ldlcert_membership_ldlps",
        "ldlcert_analyze_json",
        "ldlcert_behavior_free",
        "ldlcert_joint_free",
        "typedef struct LdlcertBehavior LdlcertBehavior;",
        "LDLCERT_STATUS_INFEASIBLE = 1",
    ] {
        assert!(header.contains(f), "header lacks {f}");
    }
    let v = unsafe { CStr::from_ptr(ldlcert_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// `target/<profile>`, found from this test binary's location.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "ldlcert.h"

int main(void) {
    LdlcertBehavior *b = NULL;
    if (ldlcert_hardy_behavior(&b) != LDLCERT_STATUS_OK) return 10;
    size_t a[2] = {0, 0}, x[2] = {0, 0};
    double p = 0.0;
    if (ldlcert_behavior_get(b, a, x, 2, &p) != LDLCERT_STATUS_OK) return 11;
    char *report = NULL;
    LdlcertStatus s = ldlcert_membership_ldlps(b, 0.1, 1.0, NULL, 0, false, &report);
    if (s != LDLCERT_STATUS_INFEASIBLE || report == NULL) return 12;
    ldlcert_string_free(report);
    if (ldlcert_membership_ldlps(b, 0.9, 0.1, NULL, 0, false, &report) != LDLCERT_STATUS_INVALID_ARGUMENT) return 13;
    if (ldlcert_last_error() == NULL) return 14;
    ldlcert_behavior_free(b);
    printf("%.6f\n", p);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let lib = profile_dir().join("libldlcert_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or no static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    let p: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((p - 1.0 / 12.0).abs() < 1e-6);
}
