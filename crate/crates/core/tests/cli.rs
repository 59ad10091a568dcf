use std::path::Path;
use std::process::Command;

use sysrisk::harness::{presets, ExperimentConfig, TRAJECTORY_HEADER};

fn sysrisk(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sysrisk")).args(args).output().expect("binary runs")
}

fn short_config(dir: &Path) -> std::path::PathBuf {
    let mut c = ExperimentConfig::from_row(&presets::table2_rows()[0]);
    c.sim.dynamics.rounds = 40;
    c.seeds = vec![5, 6];
    let path = dir.join("run.conf");
    std::fs::write(&path, c.to_text()).unwrap();
    path
}

#[test]
fn simulate_is_byte_identical_across_invocations() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = short_config(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = sysrisk(&["simulate", "--config", conf.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for seed in [5, 6] {
        let name = format!("trajectory_seed{seed}.csv");
        let x = std::fs::read(a.join(&name)).unwrap();
        let y = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRAJECTORY_HEADER);
        assert_eq!(text.lines().count(), 41);
    }
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seeds"], serde_json::json!([5, 6]));
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn schema_violation_exits_non_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("bad.conf");
    std::fs::write(&conf, "market.wealth = 70.0\nmarket.unknown = 1\n").unwrap();
    let o = sysrisk(&["simulate", "--config", conf.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = sysrisk(&["simulate", "--preset", "no-such-row"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analytic_header_carries_thresholds() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sysrisk(&["analytic", "--preset", "t4-r3", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(tmp.path().join("analytic.csv")).unwrap();
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("# {key}="))).unwrap();
        line.split('=').nth(1).unwrap().parse().unwrap()
    };
    assert!((value("default_onset") - 0.2616).abs() < 5e-4);
    assert!((value("switch_point") - 0.4597).abs() < 5e-4);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 100);
}

#[test]
fn ode_from_zero_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sysrisk(&["ode", "--preset", "t3-r1", "--eps0", "0", "--horizon", "2", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(tmp.path().join("ode.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[1], 0.0);
        assert_eq!(cols[3], 0.0);
    }
    assert!(tmp.path().join("attractors.json").exists());
}

#[test]
fn ess_writes_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sysrisk(&["ess", "--preset", "t4-r3", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("ess.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
}

#[test]
fn unknown_table_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sysrisk(&["reproduce", "table9", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
