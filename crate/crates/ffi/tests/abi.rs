use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use casimir_ffi::*;

fn last_error() -> String {
    let p = casimir_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn bessel_and_closed_form() {
    let mut out = 0.0;
    assert_eq!(unsafe { casimir_bessel_k(0, 1.0, &mut out) }, CasimirStatus::Ok);
    assert!((out - 0.42102443824070834).abs() < 1e-14);
    assert_eq!(unsafe { casimir_bessel_k(0, -1.0, &mut out) }, CasimirStatus::Domain);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { casimir_flat_plate_force(CasimirDimensionality::Two, 1.0, &mut out) }, CasimirStatus::Ok);
    assert!((out + 0.04782832450389629).abs() < 1e-12);
    assert_eq!(unsafe { casimir_bessel_k(0, 1.0, ptr::null_mut()) }, CasimirStatus::NullPointer);
}

#[test]
fn config_errors_map_to_status_codes() {
    let mut cfg = ptr::null_mut();
    let bad = CString::new(r#"{"geometry": {"a": 2, "u": 0.5, "v": 0.4, "l": 1, "bogus": 1}}"#).unwrap();
    assert_eq!(unsafe { casimir_config_from_json(bad.as_ptr(), &mut cfg) }, CasimirStatus::Config);
    assert!(cfg.is_null());
    assert!(last_error().contains("bogus"));

    assert_eq!(unsafe { casimir_config_rack(2.0, 0.5, 1.6, 0.0, 1.0, 0.5, &mut cfg) }, CasimirStatus::Geometry);
    assert!(last_error().contains("u + v"));

    let not_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { casimir_config_from_json(not_utf8.as_ptr().cast(), &mut cfg) },
        CasimirStatus::InvalidUtf8
    );
    assert_eq!(unsafe { casimir_config_from_json(ptr::null(), &mut cfg) }, CasimirStatus::NullPointer);
    unsafe { casimir_config_free(ptr::null_mut()) };
    unsafe { casimir_forces_free(ptr::null_mut()) };
}

#[test]
fn setters_validate_and_keep_the_old_state_on_error() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { casimir_config_rack(2.0, 0.5, 0.3, 0.0, 1.0, 0.5, &mut cfg) }, CasimirStatus::Ok);
    assert_eq!(unsafe { casimir_config_is_rack(cfg) }, 1);
    assert_eq!(unsafe { casimir_config_set_mass(cfg, -1.0) }, CasimirStatus::Config);
    assert_eq!(unsafe { casimir_config_set_mesh(cfg, 0.1, 4) }, CasimirStatus::Config);
    assert_eq!(unsafe { casimir_config_set_mesh(cfg, 0.9, 3) }, CasimirStatus::Precondition);
    assert_eq!(unsafe { casimir_config_set_shift(cfg, 0.5) }, CasimirStatus::Ok);
    assert_eq!(unsafe { casimir_config_set_mass(cfg, 0.5) }, CasimirStatus::Ok);
    unsafe { casimir_config_free(cfg) };
}

#[test]
fn compute_through_handles() {
    let json = CString::new(
        r#"{
            "geometry": {"a": 2, "u": 0.5, "v": 0.5, "l": 1, "H": 0},
            "numerics": {"element_size": 0.2, "periods_realized": 3, "error_mode": "quadrature_only"}
        }"#,
    )
    .unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { casimir_config_from_json(json.as_ptr(), &mut cfg) }, CasimirStatus::Ok);
    let mut forces = ptr::null_mut();
    assert_eq!(unsafe { casimir_compute(cfg, &mut forces) }, CasimirStatus::Ok);
    assert!(unsafe { casimir_forces_elements(forces) } > 0);
    let (mut value, mut error) = (0.0, 0.0);
    let status = unsafe {
        casimir_forces_get(forces, CasimirDimensionality::Two, CasimirComponent::Normal, &mut value, &mut error)
    };
    assert_eq!(status, CasimirStatus::Ok);
    let per_length = value / 2.0;
    assert!(((per_length + 0.04782832450389629) / 0.04782832450389629).abs() < 0.02, "{per_length}");
    let status = unsafe {
        casimir_forces_get(forces, CasimirDimensionality::Three, CasimirComponent::Tangential, &mut value, &mut error)
    };
    assert_eq!(status, CasimirStatus::Ok);
    assert!(value.abs() < 1e-10);
    unsafe {
        casimir_forces_free(forces);
        casimir_config_free(cfg);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(casimir_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/casimir.h")).unwrap();
    for name in [
        "casimir_config_from_json",
        "casimir_config_rack",
        "casimir_compute",
        "casimir_forces_get",
        "casimir_forces_free",
        "casimir_last_error",
        "CASIMIR_STATUS_OK",
        "typedef struct CasimirConfig CasimirConfig",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"casimir.h\"\nint main(void) { double k; return casimir_bessel_k(0, 1.0, &k) == CASIMIR_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
