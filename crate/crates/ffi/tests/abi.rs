use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use pvtrack_ffi::*;

fn scenario_path(name: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/scenarios")
        .join(format!("{name}.toml"));
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = pvt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(name: &str) -> *mut PvtScenario {
    let mut s = ptr::null_mut();
    let path = scenario_path(name);
    assert_eq!(unsafe { pvt_scenario_load(path.as_ptr(), &mut s) }, PvtStatus::Ok);
    s
}

#[test]
fn panel_round_trip() {
    unsafe {
        let mut panel = ptr::null_mut();
        assert_eq!(pvt_panel_new(pvt_panel_params_reference(), &mut panel), PvtStatus::Ok);
        let mut voc = 0.0;
        assert_eq!(pvt_panel_voc(panel, 1000.0, 25.0, &mut voc), PvtStatus::Ok);
        let mut mpp = PvtPoint::default();
        assert_eq!(pvt_panel_true_mpp(panel, 1000.0, 25.0, &mut mpp), PvtStatus::Ok);
        assert!((0.7..=0.8).contains(&(mpp.v / voc)));
        let mut i = 0.0;
        assert_eq!(pvt_panel_current(panel, mpp.v, 1000.0, 25.0, &mut i), PvtStatus::Ok);
        assert!((i * mpp.v - mpp.p).abs() < 1e-9 * mpp.p);
        assert_eq!(pvt_panel_voc(panel, 0.0, 25.0, &mut voc), PvtStatus::NoLight);
        assert!(last_error().contains("irradiance"));
        pvt_panel_free(panel);
    }
}

#[test]
fn invalid_panel_rejected() {
    unsafe {
        let mut params = pvt_panel_params_reference();
        params.n_series = 0;
        let mut panel = ptr::null_mut();
        assert_eq!(pvt_panel_new(params, &mut panel), PvtStatus::InvalidArgument);
        assert!(panel.is_null());
    }
}

#[test]
fn null_handles_are_reported() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(pvt_panel_voc(ptr::null(), 1000.0, 25.0, &mut out), PvtStatus::NullPointer);
        assert_eq!(pvt_trace_len(ptr::null()), 0);
        assert!(pvt_controller_duty(ptr::null()).is_nan());
        pvt_panel_free(ptr::null_mut());
        pvt_trace_free(ptr::null_mut());
        pvt_scenario_free(ptr::null_mut());
        pvt_controller_free(ptr::null_mut());
    }
}

#[test]
fn simulate_and_inspect_trace() {
    unsafe {
        let s = load("stc");
        let mut trace = ptr::null_mut();
        let name = CString::new("hybrid").unwrap();
        assert_eq!(pvt_simulate(s, name.as_ptr(), &mut trace), PvtStatus::Ok);
        assert_eq!(pvt_trace_len(trace), 500);
        let mut rec = std::mem::zeroed::<PvtRecord>();
        assert_eq!(pvt_trace_record(trace, 1, &mut rec), PvtStatus::Ok);
        assert_eq!(CStr::from_ptr(rec.mode).to_str().unwrap(), "calc");
        assert_eq!(pvt_trace_record(trace, 500, &mut rec), PvtStatus::InvalidArgument);
        let mut eff = 0.0;
        assert_eq!(pvt_trace_efficiency(trace, &mut eff), PvtStatus::Ok);
        assert!(eff > 0.99 && eff <= 1.0);

        let dir = tempfile::tempdir().unwrap();
        let out = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
        assert_eq!(pvt_trace_write_csv(trace, out.as_ptr()), PvtStatus::Ok);
        let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(csv.lines().count(), 501);

        let mut hash = 0;
        assert_eq!(pvt_scenario_hash(s, &mut hash), PvtStatus::Ok);
        assert_ne!(hash, 0);
        pvt_trace_free(trace);
        pvt_scenario_free(s);
    }
}

#[test]
fn unknown_controller_is_config_error() {
    unsafe {
        let s = load("stc");
        let mut trace = ptr::null_mut();
        let name = CString::new("neural").unwrap();
        assert_eq!(pvt_simulate(s, name.as_ptr(), &mut trace), PvtStatus::Config);
        assert!(last_error().contains("frac_isc"));
        assert!(trace.is_null());
        pvt_scenario_free(s);
    }
}

#[test]
fn bad_toml_reports_config() {
    unsafe {
        let src = CString::new("[bus]\nvl = 60.0\n").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(pvt_scenario_parse(src.as_ptr(), &mut s), PvtStatus::Config);
        assert!(last_error().contains("vl"));
    }
}

#[test]
fn controller_stepping_and_probes() {
    unsafe {
        let s = load("stc");
        let mut c = ptr::null_mut();
        let name = CString::new("frac_voc").unwrap();
        assert_eq!(pvt_controller_new(s, name.as_ptr(), &mut c), PvtStatus::Ok);
        let mut probe = PvtProbe::None;
        assert_eq!(pvt_controller_probe(c, 0.0, &mut probe), PvtStatus::Ok);
        assert_eq!(probe, PvtProbe::OpenCircuit);
        let m = PvtMeasurement {
            v_pv: 40.0,
            i_pv: 0.0,
            t: 25.0,
            time: 0.0,
            probe,
        };
        let mut duty = 0.0;
        assert_eq!(pvt_controller_step(c, m, &mut duty), PvtStatus::Ok);
        assert!((duty - (1.0 - 0.74 * 40.0 / 60.0)).abs() < 1e-12);
        assert_eq!(pvt_controller_duty(c), duty);

        let dark = PvtMeasurement { v_pv: 0.0, ..m };
        assert_eq!(pvt_controller_step(c, dark, &mut duty), PvtStatus::NoLight);
        pvt_controller_free(c);
        pvt_scenario_free(s);
    }
}

#[test]
fn thd_of_pure_harmonic_mix() {
    let (f0, fs) = (50.0, 5000.0);
    let x: Vec<f64> = (0..1000)
        .map(|k| {
            let w = 2.0 * std::f64::consts::PI * f0 * k as f64 / fs;
            w.sin() + 0.05 * (5.0 * w).sin()
        })
        .collect();
    let mut out = 0.0;
    unsafe {
        assert_eq!(pvt_thd(x.as_ptr(), x.len(), fs, f0, 20, &mut out), PvtStatus::Ok);
        assert!((out - 5.0).abs() < 1e-6);
        assert_eq!(pvt_thd(x.as_ptr(), 10, fs, f0, 20, &mut out), PvtStatus::InsufficientSamples);
        assert_eq!(pvt_thd(x.as_ptr(), x.len(), fs, 0.0, 20, &mut out), PvtStatus::InvalidArgument);
    }
}

#[test]
fn status_strings_are_static() {
    let s = unsafe { CStr::from_ptr(pvt_status_str(PvtStatus::ZeroFundamental)) };
    assert_eq!(s.to_str().unwrap(), "zero fundamental");
    let v = unsafe { CStr::from_ptr(pvt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/pvtrack.h")).unwrap();
    let src = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["typedef struct PvtPanel PvtPanel", "PVT_STATUS_OK = 0", "PVT_PROBE_OPEN_CIRCUIT"] {
        assert!(header.contains(ty), "{ty}");
    }
}

/// Compiles the C example against the generated header and shared library.
/// Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    use std::process::Command;
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libpvtrack_ffi.so").exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C toolchain or shared library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("examples/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-lpvtrack_ffi", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).arg(scenario_path("stc").to_str().unwrap()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("records 500"), "{text}");
    assert!(text.contains(&format!("bogus {}", PvtStatus::Config as i32)), "{text}");
}
