use proptest::prelude::*;
use sysrisk::analytic::safe_win_probability;
use sysrisk::harness::presets;
use sysrisk::replicator::{estimate_limit, run_simulation, step_round, PopulationState, SimConfig, Trajectory};

fn check_bookkeeping(t: &Trajectory, arrival_bound: u64, departure_bound: u64, departures: bool) {
    for w in t.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert_eq!(b.n1 as u64, a.n1 as u64 + a.xi + a.to_safe - a.to_risky);
        assert_eq!(b.n as u64, a.n as u64 + a.arrivals - a.departures);
    }
    let cap = 1.0 + arrival_bound as f64 + if departures { departure_bound as f64 } else { 0.0 };
    for r in &t.records {
        assert!(r.psi > 0.0 && r.psi <= cap, "psi {}", r.psi);
        assert!((0.0..=1.0).contains(&r.eps));
        assert!(r.n >= 2);
        if !departures {
            assert_eq!(r.departures, 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn counts_are_conserved(
        n0 in 10u64..60,
        eps0 in 0.0f64..=1.0,
        accuracy in 0.0f64..=1.0,
        arrivals in 0.5f64..4.0,
        switches in 0.0f64..8.0,
        departure_share in 0.0f64..0.95,
        link in prop_oneof![Just(1.0), 0.2f64..1.0],
        fixed in any::<bool>(),
        deterministic in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut market = presets::tables34_market();
        market.link_probability = link;
        let mut d = presets::table3_dynamics(eps0, arrivals * departure_share);
        d.initial_population = n0;
        d.rounds = 40;
        d.mean_arrivals = arrivals;
        d.arrival_bound = sysrisk::model::default_bound(arrivals);
        d.mean_switch_attempts = switches;
        d.switch_attempt_bound = sysrisk::model::default_bound(switches);
        d.arrival_accuracy = accuracy;
        d.switch_accuracy = accuracy;
        let mut config = SimConfig::new(market, d);
        config.options.fixed_links = fixed;
        config.options.deterministic_counts = deterministic;
        let t = run_simulation(&config, seed).unwrap();
        check_bookkeeping(&t, d.arrival_bound, d.departure_cap_bound, d.departures);
    }
}

#[test]
fn null_dynamics_leave_population_unchanged() {
    let mut d = presets::table2_dynamics(0.9, 0.4);
    d.mean_arrivals = 0.0;
    d.arrival_bound = 0;
    d.mean_switch_attempts = 0.0;
    d.switch_attempt_bound = 0;
    d.rounds = 5;
    let t = run_simulation(&SimConfig::new(presets::table2_market(0.85), d), 1).unwrap();
    assert!(t.records.iter().all(|r| r.n == 300 && r.n1 == 120));
    assert_eq!((t.final_n, t.final_n1), (300, 120));
}

#[test]
fn all_safe_start_is_absorbing() {
    let mut d = presets::table2_dynamics(0.9, 1.0);
    d.rounds = 50;
    let t = run_simulation(&SimConfig::new(presets::table2_market(0.85), d), 2).unwrap();
    assert!(t.records.iter().all(|r| r.eps == 1.0));
    assert_eq!(estimate_limit(&t, None), 1.0);
}

#[test]
fn perfect_information_moves_to_risky_below_switch_point() {
    let p = presets::table2_market(1.0);
    assert_eq!(safe_win_probability(&p, 0.3).unwrap(), 0.0);
    let mut d = presets::table2_dynamics(1.0, 0.3);
    d.initial_population = 2000;
    let config = SimConfig::new(p, d);
    let state = PopulationState::initial(&d, false);
    for seed in 0..20 {
        let (_, rec) = step_round(&state, &config, seed).unwrap();
        assert_eq!(rec.to_safe, 0);
        assert_eq!(rec.default_frac, 0.0);
    }
}

/// Mean of `to_safe - to_risky` over replays of one frozen round, against
/// `n/(n-1) eps (1-eps) (2b-1)(2q-1) E[S]`.
fn drift_check(delta: f64, eps: f64, accuracy: f64) {
    let p = presets::table2_market(delta);
    let mut d = presets::table2_dynamics(accuracy, eps);
    d.initial_population = 1000;
    let q = safe_win_probability(&p, eps).unwrap();
    let config = SimConfig::new(p, d);
    let state = PopulationState::initial(&d, false);
    let n = state.n() as f64;
    let e = state.eps();
    let reps = 3000;
    let xs: Vec<f64> = (0..reps)
        .map(|s| {
            let (_, r) = step_round(&state, &config, 10_000 + s).unwrap();
            r.to_safe as f64 - r.to_risky as f64
        })
        .collect();
    let mean = xs.iter().sum::<f64>() / reps as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let se = (var / reps as f64).sqrt();
    let expected = n / (n - 1.0) * e * (1.0 - e) * (2.0 * accuracy - 1.0) * (2.0 * q - 1.0) * d.mean_switch_attempts;
    assert!((mean - expected).abs() <= 3.0 * se, "mean {mean} expected {expected} se {se}");
}

#[test]
fn switching_drift_without_defaults() {
    drift_check(1.0, 0.3, 0.9);
}

#[test]
fn switching_drift_with_defaults() {
    drift_check(0.85, 0.3, 0.75);
}

#[test]
fn same_seed_same_run() {
    let row = presets::table4_rows(true)[2];
    let mut d = row.dynamics;
    d.rounds = 60;
    let c = SimConfig::new(row.market, d);
    assert_eq!(run_simulation(&c, 9).unwrap(), run_simulation(&c, 9).unwrap());
    assert_ne!(run_simulation(&c, 9).unwrap().records, run_simulation(&c, 10).unwrap().records);
}
