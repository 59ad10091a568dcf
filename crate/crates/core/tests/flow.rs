mod common;

use proptest::prelude::*;
use sysrisk::analytic::thresholds;
use sysrisk::harness::presets;
use sysrisk::odeflow::{
    classify_attractors, finite_round_estimate, ode_numeric, ode_solution, ode_solution_departures,
    FlowField, OdeState, RegimeLabel,
};

use common::{finite_round, logistic, logistic_with_outflow};

#[test]
fn single_piece_matches_logistic_formula() {
    // Start above the switch point: the rate is the drift itself and the
    // state never leaves the piece.
    let p = presets::table2_market(0.85);
    let d = presets::table2_dynamics(0.9, 0.9);
    for t in [0.0, 0.1, 0.5, 2.0, 10.0] {
        let s = ode_solution(&p, &d, 0.9, 1.0, t).unwrap();
        let e = logistic(0.9, d.drift(), d.mean_arrivals, 1.0, t);
        assert!((s.eps - e).abs() < 1e-12, "t {t}: {} vs {e}", s.eps);
    }
    // Below the switch point with a positive drift and a likely up move the
    // state decays towards zero on one piece.
    let d = presets::table2_dynamics(0.9, 0.5);
    let kappa = d.drift() * (1.0 - 2.0 * p.up_probability);
    for t in [0.3, 3.0] {
        let s = ode_solution(&p, &d, 0.5, 1.0, t).unwrap();
        assert!((s.eps - logistic(0.5, kappa, 1.0, 1.0, t)).abs() < 1e-12);
    }
}

#[test]
fn finite_round_formula() {
    let p = presets::table2_market(0.85);
    let d = presets::table2_dynamics(0.9, 0.85);
    for k in [1, 10, 100, 1000] {
        let lib = finite_round_estimate(&p, &d, 0.85, 0, k).unwrap();
        let raw = finite_round(0.85, d.drift(), d.mean_arrivals, d.initial_population, k);
        assert!((lib - raw).abs() < 1e-12, "k {k}: {lib} vs {raw}");
    }
}

#[test]
fn outflow_piece_matches_formula() {
    let p = presets::tables34_market();
    let d = presets::table3_dynamics(0.6, 5.6);
    let th = thresholds(&p).unwrap();
    assert!(0.6 > th.switch_point);
    for t in [0.05, 0.2, 0.4] {
        let s = ode_solution_departures(&p, &d, 0.6, 1.0, t).unwrap();
        let e = logistic_with_outflow(0.6, d.drift(), 5.6, 7.0, 1.0, t);
        if e < 1.0 {
            assert!((s.eps - e).abs() < 1e-12, "t {t}: {} vs {e}", s.eps);
        }
    }
}

#[test]
fn zero_start_stays_flat() {
    let p = presets::tables34_market();
    let d = presets::table3_dynamics(0.0, 0.0);
    let f = FlowField::new(&p, &d).unwrap();
    let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
    let traj = f.trajectory(OdeState { t: 0.0, eps: 0.0, psi: 1.0 }, &times).unwrap();
    assert!(traj.iter().all(|s| s.eps == 0.0));
}

#[test]
fn attractor_sets_follow_drift_and_departures() {
    let m = presets::tables34_market();
    let sp = thresholds(&m).unwrap().switch_point;
    let eps_of = |d| {
        let mut v: Vec<f64> = classify_attractors(&m, &d).unwrap().attractors.iter().map(|a| a.eps).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    assert_eq!(eps_of(presets::table3_dynamics(0.4, 0.0)), vec![0.0, 1.0]);
    assert_eq!(eps_of(presets::table3_dynamics(0.4, 5.6)), vec![0.0, 1.0]);
    assert_eq!(eps_of(presets::table4_dynamics(0.4, 0.0)), vec![sp]);
    assert_eq!(eps_of(presets::table4_dynamics(0.4, 1.75)), vec![1.0]);
    assert_eq!(eps_of(presets::table4_dynamics(0.8, 1.0)), vec![sp, 1.0]);
    let report = classify_attractors(&m, &presets::table4_dynamics(0.8, 1.0)).unwrap();
    assert_eq!(report.regime_label, RegimeLabel::DeparturesMixed);
    let mixed = report.attractors.iter().find(|a| a.eps == sp).unwrap();
    assert!((mixed.psi - 6.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_form_tracks_rk4(
        eps0 in 0.01f64..0.99,
        accuracy in 0.05f64..0.95,
        outflow in prop_oneof![Just(0.0), 0.2f64..6.5],
    ) {
        let p = presets::tables34_market();
        let d = presets::table3_dynamics(eps0, outflow);
        let mut d = d;
        d.arrival_accuracy = accuracy;
        d.switch_accuracy = accuracy;
        let f = FlowField::new(&p, &d).unwrap();
        let rk = ode_numeric(&p, &d, eps0, 1.0, 10.0, 1e-3).unwrap();
        let times: Vec<f64> = rk.iter().map(|s| s.t).collect();
        let exact = f.trajectory(OdeState { t: 0.0, eps: eps0, psi: 1.0 }, &times).unwrap();
        let tol = if outflow > 0.0 { 1e-5 } else { 1e-6 };
        for (a, b) in exact.iter().zip(&rk) {
            prop_assert!((a.eps - b.eps).abs() <= tol, "t {}: {} vs {}", a.t, a.eps, b.eps);
            prop_assert!((0.0..=1.0).contains(&a.eps) && a.psi > 0.0);
        }
    }
}
