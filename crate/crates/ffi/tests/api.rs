use std::ffi::{c_char, CStr, CString};
use std::ptr;

use nvdiss_ffi::*;

fn last_error() -> String {
    let mut needed = 0usize;
    unsafe { nvdiss_last_error_message(ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0 as c_char; needed];
    let s = unsafe { nvdiss_last_error_message(buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(s, NvdissStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn preset(name: &str) -> *mut NvdissConfig {
    let name = CString::new(name).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { nvdiss_config_from_preset(name.as_ptr(), &mut cfg) }, NvdissStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

#[test]
fn steady_preset_round_trip() {
    let cfg = preset("steady-collective");
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { nvdiss_run(cfg, &mut run) }, NvdissStatus::Ok);
    let mut f = 0.0;
    assert_eq!(unsafe { nvdiss_run_final_fidelity(run, &mut f) }, NvdissStatus::Ok);
    assert!(f > 1.0 - 1e-9);
    let mut n = 99usize;
    assert_eq!(unsafe { nvdiss_run_len(run, &mut n) }, NvdissStatus::Ok);
    assert_eq!(n, 0);

    let mut needed = 0usize;
    let s = unsafe { nvdiss_run_summary_json(run, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(s, NvdissStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    let s = unsafe { nvdiss_run_summary_json(run, buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(s, NvdissStatus::Ok);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    assert_eq!(v["solver"], "steady");
    assert_eq!(v["steady"]["null_dim"], 1);
    unsafe {
        nvdiss_run_free(run);
        nvdiss_config_free(cfg);
    }
}

#[test]
fn time_series_columns() {
    let cfg = preset("fig4a-me");
    unsafe {
        assert_eq!(nvdiss_config_set_time(cfg, 20.0, 5), NvdissStatus::Ok);
        let tier = CString::new("gamma_phi").unwrap();
        assert_eq!(nvdiss_config_set_param(cfg, tier.as_ptr(), 0.001), NvdissStatus::Ok);
    }
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { nvdiss_run(cfg, &mut run) }, NvdissStatus::Ok);
    let mut n = 0usize;
    unsafe { nvdiss_run_len(run, &mut n) };
    assert_eq!(n, 5);
    let mut t = vec![0.0; n];
    let name = CString::new("t").unwrap();
    assert_eq!(unsafe { nvdiss_run_column(run, name.as_ptr(), t.as_mut_ptr(), n) }, NvdissStatus::Ok);
    assert_eq!(t, [0.0, 5.0, 10.0, 15.0, 20.0]);
    let mut p00 = vec![0.0; n];
    let name = CString::new("P00").unwrap();
    assert_eq!(unsafe { nvdiss_run_column(run, name.as_ptr(), p00.as_mut_ptr(), n) }, NvdissStatus::Ok);
    assert_eq!(p00[0], 1.0);
    let short = CString::new("F").unwrap();
    assert_eq!(unsafe { nvdiss_run_column(run, short.as_ptr(), p00.as_mut_ptr(), 2) }, NvdissStatus::BufferTooSmall);
    let missing = CString::new("n_c2").unwrap();
    assert_eq!(unsafe { nvdiss_run_column(run, missing.as_ptr(), p00.as_mut_ptr(), n) }, NvdissStatus::NotFound);
    assert!(last_error().contains("n_c2"));
    unsafe {
        nvdiss_run_free(run);
        nvdiss_config_free(cfg);
    }
}

#[test]
fn mcwf_from_toml_is_reproducible() {
    let text = CString::new(
        "preset = \"fig4a\"\nt_end = 10.0\nn_samples = 3\nn_traj = 3\nseed = 7\ntier = \"effective-raman\"\n",
    )
    .unwrap();
    let mut values = Vec::new();
    for _ in 0..2 {
        let mut cfg = ptr::null_mut();
        assert_eq!(unsafe { nvdiss_config_from_toml(text.as_ptr(), &mut cfg) }, NvdissStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(unsafe { nvdiss_run(cfg, &mut run) }, NvdissStatus::Ok);
        let mut col = vec![0.0; 3];
        let name = CString::new("stderr_F").unwrap();
        assert_eq!(unsafe { nvdiss_run_column(run, name.as_ptr(), col.as_mut_ptr(), 3) }, NvdissStatus::Ok);
        values.push(col);
        unsafe {
            nvdiss_run_free(run);
            nvdiss_config_free(cfg);
        }
    }
    assert_eq!(values[0], values[1]);
}

#[test]
fn error_codes() {
    let mut cfg = ptr::null_mut();
    let bad = CString::new("no-such-preset").unwrap();
    assert_eq!(unsafe { nvdiss_config_from_preset(bad.as_ptr(), &mut cfg) }, NvdissStatus::InvalidConfig);
    assert!(last_error().contains("no-such-preset"));
    assert!(cfg.is_null());

    assert_eq!(unsafe { nvdiss_config_from_preset(ptr::null(), &mut cfg) }, NvdissStatus::NullPointer);
    let bad_toml = CString::new("solver = \"steady\"\ntier = \"full-rotated\"").unwrap();
    assert_eq!(unsafe { nvdiss_config_from_toml(bad_toml.as_ptr(), &mut cfg) }, NvdissStatus::InvalidConfig);

    let invalid_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { nvdiss_config_from_preset(invalid_utf8.as_ptr() as *const c_char, &mut cfg) },
        NvdissStatus::InvalidUtf8
    );

    let cfg = preset("fig4a");
    let name = CString::new("not_a_param").unwrap();
    assert_eq!(unsafe { nvdiss_config_set_param(cfg, name.as_ptr(), 1.0) }, NvdissStatus::InvalidConfig);
    let kappa = CString::new("kappa").unwrap();
    assert_eq!(unsafe { nvdiss_config_set_param(cfg, kappa.as_ptr(), -1.0) }, NvdissStatus::InvalidConfig);
    assert_eq!(unsafe { nvdiss_config_set_time(cfg, -5.0, 10) }, NvdissStatus::InvalidConfig);
    assert_eq!(unsafe { nvdiss_config_set_trajectories(cfg, 0, 1) }, NvdissStatus::InvalidConfig);
    assert_eq!(unsafe { nvdiss_run(ptr::null(), ptr::null_mut()) }, NvdissStatus::NullPointer);
    let mut f = 0.0;
    assert_eq!(unsafe { nvdiss_run_final_fidelity(ptr::null(), &mut f) }, NvdissStatus::NullPointer);
    unsafe {
        nvdiss_config_free(cfg);
        nvdiss_config_free(ptr::null_mut());
        nvdiss_run_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(nvdiss_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/nvdiss.h")).unwrap();
    for f in [
        "nvdiss_version",
        "nvdiss_last_error_message",
        "nvdiss_config_from_preset",
        "nvdiss_config_from_toml",
        "nvdiss_config_free",
        "nvdiss_config_set_param",
        "nvdiss_config_set_time",
        "nvdiss_config_set_trajectories",
        "nvdiss_run",
        "nvdiss_run_free",
        "nvdiss_run_final_fidelity",
        "nvdiss_run_len",
        "nvdiss_run_column",
        "nvdiss_run_summary_json",
        "typedef struct NvdissConfig NvdissConfig",
        "NVDISS_STATUS_BUFFER_TOO_SMALL = 12",
    ] {
        assert!(header.contains(f), "header lacks {f}");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/nvdiss.h");
    let status = match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).status() {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler available; skipping");
            return;
        }
    };
    assert!(status.success());
}
