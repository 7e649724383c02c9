use std::ffi::{c_char, CStr, CString};
use std::process::Command;
use std::ptr;

use qcldpc_ffi::*;

fn last_error() -> String {
    let mut needed = 0usize;
    unsafe {
        assert_eq!(qc_last_error(ptr::null_mut(), 0, &mut needed), QcStatus::BufferTooSmall);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(qc_last_error(buf.as_mut_ptr(), buf.len(), ptr::null_mut()), QcStatus::Ok);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn exponent_round_trip_and_girth() {
    unsafe {
        let mut e: *mut QcExponent = ptr::null_mut();
        let text = CString::new("2 3 7\n1 2 4\n6 5 3\n").unwrap();
        assert_eq!(qc_exponent_from_text(text.as_ptr(), &mut e), QcStatus::Ok);
        let mut girth = 0;
        assert_eq!(qc_exponent_girth(e, &mut girth), QcStatus::Ok);
        let mut h: *mut QcBinary = ptr::null_mut();
        assert_eq!(qc_exponent_expand(e, &mut h), QcStatus::Ok);
        let (mut r, mut c, mut nnz) = (0, 0, 0);
        assert_eq!(qc_binary_shape(h, &mut r, &mut c, &mut nnz), QcStatus::Ok);
        assert_eq!((r, c, nnz), (14, 21, 42));
        let mut g2 = 0;
        assert_eq!(qc_binary_girth(h, &mut g2), QcStatus::Ok);
        assert_eq!(girth, g2);

        let mut needed = 0;
        assert_eq!(qc_exponent_to_text(e, ptr::null_mut(), 0, &mut needed), QcStatus::BufferTooSmall);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(qc_exponent_to_text(e, buf.as_mut_ptr(), needed, ptr::null_mut()), QcStatus::Ok);
        let mut e2: *mut QcExponent = ptr::null_mut();
        assert_eq!(qc_exponent_from_text(buf.as_ptr(), &mut e2), QcStatus::Ok);

        let mut needed = 0;
        qc_binary_to_alist(h, ptr::null_mut(), 0, &mut needed);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(qc_binary_to_alist(h, buf.as_mut_ptr(), needed, ptr::null_mut()), QcStatus::Ok);
        let mut h2: *mut QcBinary = ptr::null_mut();
        assert_eq!(qc_binary_from_alist(buf.as_ptr(), &mut h2), QcStatus::Ok);
        qc_binary_shape(h2, &mut r, &mut c, &mut nnz);
        assert_eq!(nnz, 42);

        qc_exponent_free(e);
        qc_exponent_free(e2);
        qc_binary_free(h);
        qc_binary_free(h2);
        qc_exponent_free(ptr::null_mut());
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut e: *mut QcExponent = ptr::null_mut();
        let bad = CString::new("1 1 3\n5\n").unwrap();
        assert_eq!(qc_exponent_from_text(bad.as_ptr(), &mut e), QcStatus::Parse);
        assert!(last_error().contains("parse error"));
        let name = CString::new("no_such_fixture").unwrap();
        assert_eq!(qc_exponent_from_atlas(name.as_ptr(), &mut e), QcStatus::Lookup);
        assert_eq!(qc_exponent_from_atlas(ptr::null(), &mut e), QcStatus::NullPointer);
        let mut girth = 0;
        assert_eq!(qc_exponent_girth(ptr::null(), &mut girth), QcStatus::NullPointer);
        let w = [1.0; 4];
        assert_eq!(qc_permanent_bethe(2, w.as_ptr(), 1.5, 1e-9, 100, &mut 0.0, &mut false), QcStatus::Domain);
    }
}

#[test]
fn numerics() {
    unsafe {
        let w = [1.0, 1.0, 1.0, 1.0];
        let mut p = 0.0;
        assert_eq!(qc_permanent_exact(2, w.as_ptr(), &mut p), QcStatus::Ok);
        assert_eq!(p, 2.0);
        let (mut pb, mut conv) = (0.0, false);
        assert_eq!(qc_permanent_bethe(2, w.as_ptr(), 0.5, 1e-10, 1000, &mut pb, &mut conv), QcStatus::Ok);
        assert!(conv && pb <= 2.0 * (1.0 + 1e-9));

        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let mut err = 0.0;
        assert_eq!(qc_tsvd_error(3, id.as_ptr(), 1, &mut err), QcStatus::Ok);
        assert!((err - 2f64.sqrt()).abs() < 1e-12);
        let x: Vec<f64> = (0..64).map(|k| ((k * 7) % 11) as f64 / 11.0).collect();
        let m = CString::new("sf_chord").unwrap();
        let (mut fe, mut nnz) = (0.0, 0usize);
        assert_eq!(qc_sf_factorize(8, x.as_ptr(), m.as_ptr(), 200, 0, &mut fe, &mut nnz), QcStatus::Ok);
        assert!(fe.is_finite() && nnz > 0);

        let mut g: *mut QcGraph = ptr::null_mut();
        let (i, j, c) = ([0usize, 1], [1usize, 2], [1.0, -1.0]);
        assert_eq!(qc_graph_new(3, 2, i.as_ptr(), j.as_ptr(), c.as_ptr(), &mut g), QcStatus::Ok);
        let (mut nn, mut ne) = (0, 0);
        qc_graph_size(g, &mut nn, &mut ne);
        assert_eq!((nn, ne), (3, 2));
        // a tree has no finite Nishimori point
        assert_eq!(qc_graph_nishimori(g, 3.0, 1e-4, &mut 0.0), QcStatus::Estimation);
        qc_graph_free(g);
        let mut g: *mut QcGraph = ptr::null_mut();
        assert_eq!(qc_graph_sample_two_point(300, 5.0, 0.5, 1, &mut g), QcStatus::Ok);
        let mut beta = 0.0;
        assert_eq!(qc_graph_nishimori(g, 3.0, 1e-4, &mut beta), QcStatus::Ok);
        assert!(beta > 0.2 && beta < 1.0);
        qc_graph_free(g);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qcldpc.h")).unwrap();
    for sym in ["qc_last_error", "qc_exponent_from_text", "qc_binary_free", "qc_permanent_bethe", "qc_graph_nishimori", "qc_sf_factorize", "QC_STATUS_BUFFER_TOO_SMALL", "typedef struct QcGraph QcGraph"] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
}

/// Compiles and runs a small C program against the static library when a
/// C compiler is available.
#[test]
fn c_program_links() {
    let exe = std::env::current_exe().unwrap();
    let target = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = target.join("libqcldpc_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let src = dir.join("main.c");
    std::fs::write(
        &src,
        r#"#include "qcldpc.h"
#include <stdio.h>
int main(void) {
    QcExponent *e = NULL;
    if (qc_exponent_from_atlas("tanner_2x3_L7", &e) != QC_STATUS_OK) return 1;
    size_t girth = 0;
    if (qc_exponent_girth(e, &girth) != QC_STATUS_OK) return 2;
    qc_exponent_free(e);
    double w[4] = {1, 1, 1, 1}, p = 0;
    if (qc_permanent_exact(2, w, &p) != QC_STATUS_OK || p != 2.0) return 3;
    printf("%zu\n", girth);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let girth: usize = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(girth >= 4);
}
