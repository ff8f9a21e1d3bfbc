use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use cagecurrent_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cc_last_error()) }.to_string_lossy().into_owned()
}

fn new_sim(toml: &str) -> (CcStatus, *mut CcSimulation) {
    let text = CString::new(toml).unwrap();
    let mut sim = ptr::null_mut();
    let status = unsafe { cc_simulation_new(text.as_ptr(), &mut sim) };
    (status, sim)
}

const RESONANT: &str = "[pulse]\nomega_ev = 5.575\ncharge = [1, -1]\nrho_ratio = 0.2\n";

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(cc_version()) }.to_str().unwrap();
    assert_eq!(v, cagecurrent::cli::VERSION);
}

#[test]
fn null_arguments_are_reported() {
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { cc_simulation_new(ptr::null(), &mut sim) }, CcStatus::NullPointer);
    assert!(last_error().contains("config_toml"));
    assert_eq!(unsafe { cc_rho_max(1, 10.0, ptr::null_mut()) }, CcStatus::NullPointer);
    unsafe { cc_simulation_free(ptr::null_mut()) };
}

#[test]
fn config_errors_carry_a_message() {
    let (status, sim) = new_sim("[pulse]\nbogus = 1\n");
    assert_eq!(status, CcStatus::Config);
    assert!(sim.is_null());
    assert!(last_error().contains("bogus"), "{}", last_error());

    let (status, _) = new_sim("[pulse]\na0 = 1e-3\nintensity_w_cm2 = 1e12\n");
    assert_eq!(status, CcStatus::Config);
}

#[test]
fn invalid_utf8_is_rejected() {
    let bytes = CString::new(vec![0xff, 0xfe]).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { cc_simulation_new(bytes.as_ptr(), &mut sim) }, CcStatus::InvalidUtf8);
}

#[test]
fn evaluation_matches_the_library_and_flips_with_charge() {
    let (status, sim) = new_sim(RESONANT);
    assert_eq!(status, CcStatus::Ok, "{}", last_error());
    let mut n = 0;
    assert_eq!(unsafe { cc_simulation_evaluate(sim, &mut n) }, CcStatus::Ok);
    assert_eq!(n, 2);

    let mut r = [CcRecord::default(); 2];
    for (i, rec) in r.iter_mut().enumerate() {
        assert_eq!(unsafe { cc_simulation_record(sim, i, rec) }, CcStatus::Ok);
    }
    assert_eq!(unsafe { cc_simulation_record(sim, 2, &mut r[0].clone()) }, CcStatus::OutOfRange);
    assert!(last_error().contains("2 available"));

    let config = cagecurrent::cli::RunConfig::from_toml(RESONANT).unwrap();
    let direct = cagecurrent::cli::scan::RunPlan::new(&config).unwrap().evaluate().unwrap();
    assert_eq!(r[0].mz_au, direct[0].mz_au);
    assert_eq!(r[0].b_center_ut, direct[0].b_center_ut);
    assert_eq!((r[0].charge, r[1].charge), (1, -1));
    assert!(r[0].mz_au != 0.0);
    assert!((r[0].mz_au + r[1].mz_au).abs() <= 1e-8 * r[0].mz_au.abs());
    assert!((r[0].rho_ratio - 0.2).abs() < 1e-12);
    assert_eq!(r[0].coupled, 1);
    unsafe { cc_simulation_free(sim) };
}

#[test]
fn point_current_requires_an_excitation() {
    let (status, sim) = new_sim(RESONANT);
    assert_eq!(status, CcStatus::Ok);
    let point = [6.7, 0.3, 0.5];
    let mut j = [0.0; 3];
    assert_eq!(unsafe { cc_simulation_current(sim, point.as_ptr(), j.as_mut_ptr()) }, CcStatus::NotExcited);

    let mut validity = 0.0;
    assert_eq!(unsafe { cc_simulation_excite(sim, 1, 5.575, 0.0, 0.2, &mut validity) }, CcStatus::Ok);
    assert!(validity > 0.0);
    assert_eq!(unsafe { cc_simulation_current(sim, point.as_ptr(), j.as_mut_ptr()) }, CcStatus::Ok);
    assert!(j.iter().any(|v| *v != 0.0));

    let mut flipped = [0.0; 3];
    assert_eq!(unsafe { cc_simulation_excite(sim, -1, 5.575, 0.0, 0.2, ptr::null_mut()) }, CcStatus::Ok);
    assert_eq!(unsafe { cc_simulation_current(sim, point.as_ptr(), flipped.as_mut_ptr()) }, CcStatus::Ok);
    let scale = j.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    for k in 0..3 {
        assert!((j[k] + flipped[k]).abs() <= 1e-8 * scale, "{j:?} {flipped:?}");
    }

    let origin = [0.0; 3];
    assert_eq!(unsafe { cc_simulation_current(sim, origin.as_ptr(), j.as_mut_ptr()) }, CcStatus::Numerical);
    assert_eq!(unsafe { cc_simulation_excite(sim, 1, -1.0, 0.0, f64::NAN, ptr::null_mut()) }, CcStatus::Parameter);
    unsafe { cc_simulation_free(sim) };
}

#[test]
fn beam_helpers() {
    let mut v = 0.0;
    assert_eq!(unsafe { cc_rho_max(2, 10.0, &mut v) }, CcStatus::Ok);
    assert!((v - 10.0).abs() < 1e-12);
    assert_eq!(unsafe { cc_rho_max(0, 10.0, &mut v) }, CcStatus::Parameter);

    assert_eq!(unsafe { cc_delta_from_fwhm(10.0, &mut v) }, CcStatus::Ok);
    assert_eq!(v, cagecurrent::beam::delta_from_fwhm(10.0));
    assert_eq!(unsafe { cc_delta_from_fwhm(0.0, &mut v) }, CcStatus::Parameter);

    assert_eq!(unsafe { cc_a0_from_intensity(3e13, 0.2, &mut v) }, CcStatus::Ok);
    assert_eq!(v, cagecurrent::beam::a0_from_intensity(3e13, 0.2));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/cagecurrent.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "cc_version",
        "cc_last_error",
        "cc_simulation_new",
        "cc_simulation_free",
        "cc_simulation_evaluate",
        "cc_simulation_record",
        "cc_simulation_excite",
        "cc_simulation_current",
        "cc_rho_max",
        "cc_delta_from_fwhm",
        "cc_a0_from_intensity",
        "CC_STATUS_NOT_EXCITED",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // A C compiler is optional in the build environment.
    match Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99", header]).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler; syntax check skipped"),
    }
}
