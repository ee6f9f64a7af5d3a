use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use plateau_ffi::*;

fn last_error() -> String {
    let need = unsafe { plateau_last_error_message(ptr::null_mut(), 0) };
    if need == 0 {
        return String::new();
    }
    let mut buf = vec![0 as c_char; need];
    assert_eq!(unsafe { plateau_last_error_message(buf.as_mut_ptr(), need) }, need);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn square_through_handles() {
    let coords = [0.0, 0.0, 2.0, 0.0, 2.0, 1.0, 0.0, 1.0, 1.0, 0.5];
    let mut body = ptr::null_mut();
    unsafe {
        assert_eq!(plateau_body_from_points(2, coords.as_ptr(), 5, &mut body), PlateauStatus::Ok);
        assert_eq!(plateau_body_dim(body), 2);
        let mut v = 0.0;
        assert_eq!(plateau_body_volume(body, &mut v), PlateauStatus::Ok);
        assert!((v - 2.0).abs() < 1e-14);
        let mut d = 0.0;
        assert_eq!(plateau_body_signed_distance(body, [3.0, 0.5].as_ptr(), &mut d), PlateauStatus::Ok);
        assert!((d - 1.0).abs() < 1e-14);
        let mut p = [0.0; 2];
        assert_eq!(plateau_body_project(body, [3.0, 2.0].as_ptr(), p.as_mut_ptr()), PlateauStatus::Ok);
        assert_eq!(p, [2.0, 1.0]);
        let mut h = -1.0;
        assert_eq!(plateau_hausdorff(body, body, &mut h), PlateauStatus::Ok);
        assert_eq!(h, 0.0);
        plateau_body_free(body);
    }
    assert_eq!(last_error(), "");
}

#[test]
fn errors_are_reported_not_raised() {
    let mut body = ptr::null_mut();
    unsafe {
        assert_eq!(plateau_body_from_points(4, [0.0; 4].as_ptr(), 1, &mut body), PlateauStatus::InvalidArgument);
        assert!(last_error().contains("dimension"));
        assert_eq!(plateau_body_volume(ptr::null(), &mut 0.0), PlateauStatus::NullPointer);
        assert!(last_error().contains("body"));
        assert_eq!(plateau_body_ball(3, [0.0; 3].as_ptr(), -1.0, 2, &mut body), PlateauStatus::InvalidArgument);
        let bad = CString::new("n = 2\nh = 0.1\n").unwrap();
        let mut sol = ptr::null_mut();
        assert_eq!(plateau_solve_toml(bad.as_ptr(), ptr::null(), &mut sol), PlateauStatus::Parse);
        assert!(sol.is_null());
        // a short buffer only reports the size needed
        let need = plateau_last_error_message(ptr::null_mut(), 0);
        let mut small = [1 as c_char; 2];
        assert_eq!(plateau_last_error_message(small.as_mut_ptr(), 2), need);
        assert_eq!(small, [1, 1]);
        plateau_body_free(ptr::null_mut());
        plateau_solution_free(ptr::null_mut());
        plateau_run_free(ptr::null_mut());
    }
}

#[test]
fn arc_solution_matches_the_circle() {
    let text = CString::new("n = 1\ndomain = \"interval a=-1 b=1\"\nh = 0.015625\nphi = \"sphere k=0.25\"\n").unwrap();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(plateau_solve_toml(text.as_ptr(), ptr::null(), &mut sol), PlateauStatus::Ok);
        let n = plateau_solution_len(sol);
        let (mut xy, mut f) = (vec![0.0; 2 * n], vec![0.0; n]);
        assert_eq!(plateau_solution_copy(sol, xy.as_mut_ptr(), f.as_mut_ptr(), n - 1), PlateauStatus::BufferTooSmall);
        assert_eq!(plateau_solution_copy(sol, xy.as_mut_ptr(), f.as_mut_ptr(), n), PlateauStatus::Ok);
        let err = (0..n).map(|k| (f[k] - (3f64.sqrt() - (4.0 - xy[2 * k] * xy[2 * k]).sqrt())).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        assert!((plateau_solution_sup_error(sol) - err).abs() < 1e-15);
        assert!(plateau_solution_residual(sol) < 1e-8);
        plateau_solution_free(sol);
    }
}

#[test]
fn plateau_run_on_the_disk() {
    let mut disk = ptr::null_mut();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(plateau_body_ball(2, [0.0, 0.0].as_ptr(), 1.0, 360, &mut disk), PlateauStatus::Ok);
        assert_eq!(plateau_run_new(disk, [0.0, 1.0].as_ptr(), 0.0, 2e-3, 0.25, 8, &mut run), PlateauStatus::Ok, "{}", last_error());
        let mut status = PlateauRunStatus::MaxIterations;
        assert_eq!(plateau_run_status(run, &mut status), PlateauStatus::Ok);
        assert_eq!(status, PlateauRunStatus::Converged);
        let n = plateau_run_volume_count(run);
        let mut v = vec![0.0; n];
        assert_eq!(plateau_run_volumes(run, v.as_mut_ptr(), n), PlateauStatus::Ok);
        assert!(n >= 2 && v.windows(2).all(|w| w[1] < w[0]));
        let mut h = 0.0;
        assert_eq!(plateau_run_cap_distance(run, 1.0, &mut h), PlateauStatus::Ok);
        assert!(h < 2e-2, "{h}");
        let mut fin = ptr::null_mut();
        assert_eq!(plateau_run_body(run, &mut fin), PlateauStatus::Ok);
        let mut vol = 0.0;
        plateau_body_volume(fin, &mut vol);
        assert_eq!(vol, v[n - 1]);
        plateau_body_free(fin);
        plateau_run_free(run);
        plateau_body_free(disk);
    }
}

#[test]
fn cli_entry_point_returns_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(&cfg, "cases = 20\npolygons = 4\n").unwrap();
    let args: Vec<CString> = ["suite", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let ptrs: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
    assert_eq!(unsafe { plateau_cli_run(ptrs.len(), ptrs.as_ptr()) }, 0);
    let bogus = [CString::new("bogus").unwrap()];
    let ptrs: Vec<*const c_char> = bogus.iter().map(|a| a.as_ptr()).collect();
    assert_eq!(unsafe { plateau_cli_run(1, ptrs.as_ptr()) }, 2);
    assert_eq!(unsafe { CStr::from_ptr(plateau_version()) }.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "plateau.h"

int main(void) {
    const double pts[] = {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1};
    PlateauBody *t = NULL;
    if (plateau_body_from_points(3, pts, 4, &t) != PLATEAU_STATUS_OK) return 1;
    double v = 0;
    plateau_body_volume(t, &v);
    plateau_body_free(t);
    if (plateau_body_volume(NULL, &v) != PLATEAU_STATUS_NULL_POINTER) return 2;
    char msg[128];
    if (plateau_last_error_message(msg, sizeof msg) == 0) return 3;
    printf("%.17g\n", v);
    return 0;
}
"#;

/// Compiles a C program against the generated header and the static library.
#[test]
fn header_compiles_and_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/plateau.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["plateau_body_from_points", "plateau_solve_toml", "plateau_run_new", "plateau_last_error_message", "PLATEAU_STATUS_PANIC"] {
        assert!(text.contains(f), "{f} missing from the header");
    }
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().and_then(|d| d.parent()).map(|d| d.join("libplateau_ffi.a")).unwrap();
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C toolchain or static library; checked the header only");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.path().join("smoke");
    let cc = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let v: f64 = String::from_utf8(run.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 1.0 / 6.0).abs() < 1e-15);
}
