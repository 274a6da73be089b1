use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use tsrk_ffi::*;

fn system(a: &[f64], m: usize, n: usize, b: &[f64]) -> *mut TsrkSystem {
    let mut sys = ptr::null_mut();
    let st = unsafe { tsrk_system_new(a.as_ptr(), m, n, b.as_ptr(), &mut sys) };
    assert_eq!(st, TsrkStatus::Ok);
    sys
}

fn last_error() -> String {
    let p = tsrk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn options(method: TsrkMethod, iters: usize, x_true: *const f64) -> TsrkSolveOptions {
    TsrkSolveOptions {
        method,
        max_iterations: iters,
        seed: 7,
        sign_adjust: 0,
        residual_threshold: -1.0,
        x0: ptr::null(),
        x_true,
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(tsrk_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn analytics_on_identity() {
    let sys = system(&[1.0, 0.0, 0.0, 1.0], 2, 2, &[5.0, 7.0]);
    let (mut m, mut n) = (0, 0);
    unsafe {
        assert_eq!(tsrk_system_dims(sys, &mut m, &mut n), TsrkStatus::Ok);
        assert_eq!((m, n), (2, 2));
        let mut c = TsrkCoherence::default();
        assert_eq!(tsrk_coherence(sys, &mut c), TsrkStatus::Ok);
        assert_eq!((c.delta, c.big_delta), (0.0, 0.0));
        let mut k = TsrkCondition::default();
        assert_eq!(tsrk_condition(sys, &mut k), TsrkStatus::Ok);
        assert!((k.scaled_condition - 2.0).abs() < 1e-12);
        let mut f = TsrkRateFactors::default();
        assert_eq!(tsrk_rate_factors(sys, &mut f), TsrkStatus::Ok);
        assert!((f.eta - 0.25).abs() < 1e-12);
        assert!(f.q.is_nan());
        tsrk_system_free(sys);
    }
}

#[test]
fn solve_and_read_trace() {
    let a = [2.0, 1.0, 1.0, 3.0, 1.0, -1.0];
    let xt = [1.0, 2.0];
    let b = [4.0, 7.0, -1.0];
    let sys = system(&a, 3, 2, &b);
    unsafe {
        let opts = options(TsrkMethod::TwoSubspace, 100, xt.as_ptr());
        let mut tr = ptr::null_mut();
        assert_eq!(tsrk_solve(sys, &opts, &mut tr), TsrkStatus::Ok);
        assert_eq!(tsrk_trace_len(tr), 101);
        let mut rec = TsrkTraceRecord::default();
        assert_eq!(tsrk_trace_record(tr, 100, &mut rec), TsrkStatus::Ok);
        assert_eq!((rec.k, rec.row_touches), (100, 200));
        assert!(rec.error < 1e-10);
        assert_eq!(
            tsrk_trace_record(tr, 101, &mut rec),
            TsrkStatus::IndexOutOfRange
        );
        let mut x = [0.0; 2];
        assert_eq!(tsrk_trace_solution(tr, x.as_mut_ptr(), 2), TsrkStatus::Ok);
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 2.0).abs() < 1e-10);
        assert_eq!(
            tsrk_trace_solution(tr, x.as_mut_ptr(), 3),
            TsrkStatus::DimensionMismatch
        );

        let opts = options(TsrkMethod::Randomized, 5, ptr::null());
        let mut tr2 = ptr::null_mut();
        assert_eq!(tsrk_solve(sys, &opts, &mut tr2), TsrkStatus::Ok);
        assert_eq!(tsrk_trace_record(tr2, 0, &mut rec), TsrkStatus::Ok);
        assert!(rec.error.is_nan());
        tsrk_trace_free(tr);
        tsrk_trace_free(tr2);
        tsrk_system_free(sys);
    }
}

#[test]
fn errors_are_reported() {
    let mut sys = ptr::null_mut();
    unsafe {
        let st = tsrk_system_new(
            [1.0, 0.0, 0.0, 0.0].as_ptr(),
            2,
            2,
            [1.0, 0.0].as_ptr(),
            &mut sys,
        );
        assert_eq!(st, TsrkStatus::ZeroRow);
        assert!(sys.is_null());
        assert!(last_error().contains("row 2"), "{}", last_error());

        let st = tsrk_system_new(ptr::null(), 2, 2, [1.0, 0.0].as_ptr(), &mut sys);
        assert_eq!(st, TsrkStatus::NullPointer);

        let deficient = system(&[1.0, 1.0, 2.0, 2.0], 2, 2, &[1.0, 2.0]);
        let mut k = TsrkCondition::default();
        assert_eq!(tsrk_condition(deficient, &mut k), TsrkStatus::RankDeficient);
        let opts = options(TsrkMethod::TwoSubspace, 5, ptr::null());
        let mut tr = ptr::null_mut();
        assert_eq!(
            tsrk_solve(deficient, &opts, &mut tr),
            TsrkStatus::NoUsablePair
        );
        assert!(tr.is_null());
        tsrk_system_free(deficient);

        let mut d = 0.0;
        assert_eq!(tsrk_d_factor(0.62, 0.62, &mut d), TsrkStatus::Ok);
        assert!((d - 0.09017).abs() < 5e-6);
        assert!(tsrk_last_error_message().is_null());
        assert_eq!(tsrk_d_factor(0.7, 0.6, &mut d), TsrkStatus::InvalidArgument);

        tsrk_system_free(ptr::null_mut());
        tsrk_trace_free(ptr::null_mut());
        assert_eq!(tsrk_trace_len(ptr::null()), 0);
    }
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_compiles_as_c_and_cpp() {
    if !have_cc() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/tsrk.h");
    for (lang, std) in [("c", "-std=c99"), ("c++", "-std=c++11")] {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, std])
            .arg(&header)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "tsrk.h"

int main(void) {
    double a[] = {2, 1, 1, 3, 1, -1};
    double b[] = {4, 7, -1};
    double xt[] = {1, 2};
    TsrkSystem *sys = NULL;
    if (tsrk_system_new(a, 3, 2, b, &sys) != TSRK_STATUS_OK) return 1;
    TsrkSolveOptions o = {TSRK_METHOD_TWO_SUBSPACE, 200, 1, 1, -1.0, NULL, xt};
    TsrkTrace *tr = NULL;
    if (tsrk_solve(sys, &o, &tr) != TSRK_STATUS_OK) return 2;
    double x[2];
    if (tsrk_trace_solution(tr, x, 2) != TSRK_STATUS_OK) return 3;
    if (fabs(x[0] - 1) > 1e-10 || fabs(x[1] - 2) > 1e-10) return 4;
    double d;
    if (tsrk_d_factor(0.9, 0.1, &d) != TSRK_STATUS_INVALID_ARGUMENT) return 5;
    if (tsrk_last_error_message() == NULL) return 6;
    tsrk_trace_free(tr);
    tsrk_system_free(sys);
    printf("ok %s\n", tsrk_version());
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libtsrk_ffi.a");
    if !have_cc() || !lib.exists() {
        eprintln!("skipped: no C compiler or {} missing", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .arg("-std=c99")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
