use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use flatweb_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = fw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn depressed(a: &str, b: &str) -> *mut FwWeb {
    let mut w = ptr::null_mut();
    let st =
        unsafe { fw_web_new_depressed(c(a).as_ptr(), c(b).as_ptr(), -1.0, 1.0, -1.0, 1.0, &mut w) };
    assert_eq!(st, FwStatus::Ok);
    w
}

#[test]
fn curvature_of_closed_form_web() {
    let w = depressed("1", "y");
    let (mut k, mut delta) = (0.0, 0.0);
    assert_eq!(
        unsafe { fw_curvature(w, 0.0, 1.0, &mut k, &mut delta) },
        FwStatus::Ok
    );
    assert!((k + 216.0 / 961.0).abs() < 1e-12, "{k}");
    assert_eq!(delta, -31.0);
    unsafe { fw_web_free(w) };
}

#[test]
fn errors_are_reported() {
    let mut w = ptr::null_mut();
    let st = unsafe {
        fw_web_new_depressed(
            c("x +").as_ptr(),
            c("y").as_ptr(),
            -1.0,
            1.0,
            -1.0,
            1.0,
            &mut w,
        )
    };
    assert_eq!(st, FwStatus::Parse);
    assert!(w.is_null());
    assert!(last_error().starts_with("A:"));

    let st =
        unsafe { fw_web_new_depressed(ptr::null(), c("y").as_ptr(), -1.0, 1.0, -1.0, 1.0, &mut w) };
    assert_eq!(st, FwStatus::NullPointer);

    let st = unsafe {
        fw_web_new_depressed(
            c("x").as_ptr(),
            c("y").as_ptr(),
            1.0,
            -1.0,
            -1.0,
            1.0,
            &mut w,
        )
    };
    assert_eq!(st, FwStatus::InvalidArgument);

    let st = unsafe { fw_web_from_catalog(c("nope").as_ptr(), &mut w) };
    assert_eq!(st, FwStatus::InvalidArgument);

    let mut q = ptr::null_mut();
    assert_eq!(
        unsafe { fw_web_from_catalog(c("nf2").as_ptr(), &mut q) },
        FwStatus::Ok
    );
    let (mut k, mut d) = (0.0, 0.0);
    assert_eq!(
        unsafe { fw_curvature(q, 0.5, 0.0, &mut k, &mut d) },
        FwStatus::WrongVariant
    );
    unsafe { fw_web_free(q) };

    let w = depressed("2*x", "y");
    assert_eq!(
        unsafe { fw_curvature(w, 0.0, 0.0, &mut k, &mut d) },
        FwStatus::NotRegular
    );
    assert_eq!(
        unsafe { fw_curvature(w, 0.0, 0.0, ptr::null_mut(), &mut d) },
        FwStatus::NotRegular
    );
    unsafe { fw_web_free(w) };
}

#[test]
fn audit_classify_and_hexagon() {
    let mut w = ptr::null_mut();
    assert_eq!(
        unsafe { fw_web_from_catalog(c("nf3").as_ptr(), &mut w) },
        FwStatus::Ok
    );
    let mut f = FwFlatness::default();
    assert_eq!(
        unsafe { fw_flatness_audit(w, 32, 1e-6, &mut f) },
        FwStatus::Ok
    );
    assert!(f.flat && f.max_abs_k < 1e-6 && f.evaluated > 0);

    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { fw_classify_json(w, 0.0, 0.0, &mut s) },
        FwStatus::Ok
    );
    let json: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    assert_eq!(json["verdict"], "TripleGeneric");
    assert_eq!(json["normal_form"], "p^3+2xp+y=0");
    unsafe { fw_string_free(s) };

    let mut d = 1.0;
    assert_eq!(
        unsafe { fw_hexagon_defect(w, -1.0, 0.0, 1e-2, &mut d) },
        FwStatus::Ok
    );
    assert!(d < 1e-6);
    unsafe { fw_web_free(w) };
}

#[test]
fn spec_json_round_trips() {
    let w = depressed("2*x", "y");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fw_web_to_json(w, &mut s) }, FwStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    let spec: flatweb::web::WebSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(spec.domain, flatweb::web::DomainBox::symmetric(1.0));
    unsafe {
        fw_string_free(s);
        fw_web_free(w);
        fw_web_free(ptr::null_mut());
        fw_string_free(ptr::null_mut());
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(fw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn header_compiles_and_links() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libflatweb_ffi.a");
    assert!(
        lib.exists(),
        "static library not found at {}",
        lib.display()
    );
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("capi_smoke");
    let src = manifest.join("tests/smoke.c");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
