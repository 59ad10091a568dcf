use std::ffi::CStr;
use std::ptr;

use sysrisk_ffi::*;

#[test]
fn preset_thresholds_and_limits() {
    let mut m: *mut SysriskMarket = ptr::null_mut();
    let mut d: *mut SysriskDynamics = ptr::null_mut();
    unsafe {
        assert_eq!(sysrisk_preset(c"t4-r3".as_ptr(), &mut m, &mut d), SysriskStatus::Ok);
        let mut th = SysriskThresholds::default();
        assert_eq!(sysrisk_thresholds(m, &mut th), SysriskStatus::Ok);
        assert!((th.switch_point - 0.4597).abs() < 5e-4);
        assert!((th.default_onset - 0.2616).abs() < 5e-4);

        let (mut x, mut pd) = (0.0, 0.0);
        assert_eq!(sysrisk_clearing_limit(m, 0.35, &mut x, &mut pd), SysriskStatus::Ok);
        assert!((pd - 0.2).abs() < 1e-12 && x > 0.0);
        assert_eq!(sysrisk_clearing_limit(m, 1.5, &mut x, &mut pd), SysriskStatus::InvalidArgument);

        let (mut eps, mut psi) = (0.0, 0.0);
        assert_eq!(sysrisk_flow_at(m, d, 0.5, 1.0, 50.0, &mut eps, &mut psi), SysriskStatus::Ok);
        assert!((eps - th.switch_point).abs() < 1e-6, "{eps}");
        sysrisk_market_free(m);
        sysrisk_dynamics_free(d);
    }
}

#[test]
fn simulate_and_read_back() {
    let mut m: *mut SysriskMarket = ptr::null_mut();
    let mut d: *mut SysriskDynamics = ptr::null_mut();
    let mut t: *mut SysriskTrajectory = ptr::null_mut();
    let dir = tempfile::tempdir().unwrap();
    let path = std::ffi::CString::new(dir.path().join("run.csv").to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(sysrisk_market_new(70.0, 20.0, 0.95, 0.85, 0.15, -0.6, 0.1, 0.11, 1.0, &mut m), SysriskStatus::Ok);
        assert_eq!(sysrisk_dynamics_new(1.0, 10.0, 0.0, 0.9, 0.9, 300, 0.85, 50, &mut d), SysriskStatus::Ok);
        assert_eq!(sysrisk_simulate(m, d, 4, &mut t), SysriskStatus::Ok);
        assert_eq!(sysrisk_trajectory_len(t), 50);
        let mut first = SysriskRound::default();
        assert_eq!(sysrisk_trajectory_round(t, 0, &mut first), SysriskStatus::Ok);
        assert_eq!((first.round, first.n, first.n1), (0, 300, 255));
        let mut r = SysriskRound::default();
        assert_eq!(sysrisk_trajectory_round(t, 50, &mut r), SysriskStatus::InvalidArgument);
        let msg = CStr::from_ptr(sysrisk_last_error_message()).to_str().unwrap();
        assert!(msg.contains("out of range"), "{msg}");
        assert_eq!(sysrisk_trajectory_write_csv(t, path.as_ptr()), SysriskStatus::Ok);
        sysrisk_trajectory_free(t);
        sysrisk_market_free(m);
        sysrisk_dynamics_free(d);
        sysrisk_trajectory_free(ptr::null_mut());
    }
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    assert!(csv.starts_with("round,n,n1,eps,psi,"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sysrisk.h")).unwrap();
    for name in [
        "sysrisk_status_message",
        "sysrisk_last_error_message",
        "sysrisk_market_new",
        "sysrisk_preset",
        "sysrisk_market_free",
        "sysrisk_dynamics_new",
        "sysrisk_dynamics_free",
        "sysrisk_thresholds",
        "sysrisk_clearing_limit",
        "sysrisk_flow_at",
        "sysrisk_simulate",
        "sysrisk_trajectory_len",
        "sysrisk_trajectory_round",
        "sysrisk_trajectory_write_csv",
        "sysrisk_trajectory_free",
        "typedef struct SysriskMarket SysriskMarket;",
        "SYSRISK_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
