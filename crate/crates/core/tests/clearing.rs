mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sysrisk::clearing::{compute_returns, default_stats, solve_clearing, ClearingOptions};
use sysrisk::harness::presets;
use sysrisk::netgen::{sample_network, sample_shocks, PeerWeighting, ShockVector};

use common::*;

#[test]
fn golden_instance_matches_hand_solution() {
    let (g, s, p) = golden_instance();
    let r = solve_clearing(&g, &s, &p, &ClearingOptions { tol: 1e-13, ..Default::default() }).unwrap();
    assert!(r.converged);
    for (x, e) in r.payments.iter().zip(GOLDEN_PAYMENTS) {
        assert!((x - e).abs() < 1e-10, "{:?}", r.payments);
    }
    // Iterating from zero reaches the same point, so it is the only one.
    let (from_zero, _) = dense_clearing(&g, &s, &p, 0.0);
    let (from_top, _) = dense_clearing(&g, &s, &p, g.liability);
    for ((a, b), e) in from_zero.iter().zip(&from_top).zip(GOLDEN_PAYMENTS) {
        assert!((a - e).abs() < 1e-10 && (b - e).abs() < 1e-10);
    }
    let stats = default_stats(&r, g.liability, 1e-9);
    assert_eq!(stats.count, 2);
    assert!((stats.fraction - 2.0 / 3.0).abs() < 1e-15);
    let ret = compute_returns(&g, &r, &s, &p, 1e-9);
    assert_eq!(ret.risky[1], 0.0);
    assert_eq!(ret.risky[2], 0.0);
    assert!((ret.risky[0] - (12.0 + 0.3 * 100.0 / 7.0 - 10.0)).abs() < 1e-9);
}

#[test]
fn full_payment_when_everyone_is_up() {
    let mut p = presets::tables34_market();
    p.up_probability = 1.0;
    p.senior_debt = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = sample_network(&p, 20, 30, PeerWeighting::default(), &mut rng).unwrap();
    let s = sample_shocks(&p, 30, g.eps, &mut rng).unwrap();
    let r = solve_clearing(&g, &s, &p, &ClearingOptions::default()).unwrap();
    assert!(r.payments.iter().all(|&x| x == g.liability));
    assert!(r.iterations <= 2);
    let ret = compute_returns(&g, &r, &s, &p, 1e-9);
    for ((k, c), r2) in s.proceeds.iter().zip(&r.claims[20..]).zip(&ret.risky) {
        assert_eq!(*r2, k + c - p.senior_debt - g.liability);
    }
    assert!(ret.defaults.is_empty());
}

#[test]
fn nothing_paid_when_proceeds_cannot_cover_senior_debt() {
    let mut p = presets::systemic_contrast_market();
    p.up_probability = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = sample_network(&p, 0, 40, PeerWeighting::default(), &mut rng).unwrap();
    let s = sample_shocks(&p, 40, g.eps, &mut rng).unwrap();
    let r = solve_clearing(&g, &s, &p, &ClearingOptions::default()).unwrap();
    assert!(r.converged);
    assert!(r.payments.iter().all(|&x| x.abs() < 1e-6 * g.liability), "{:?}", &r.payments[..3]);
}

#[test]
fn all_safe_round_pays_safe_rate() {
    let p = presets::tables34_market();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = sample_network(&p, 10, 0, PeerWeighting::default(), &mut rng).unwrap();
    let s = ShockVector { proceeds: vec![], up: vec![] };
    let r = solve_clearing(&g, &s, &p, &ClearingOptions::default()).unwrap();
    let ret = compute_returns(&g, &r, &s, &p, 1e-9);
    for x in ret.safe {
        assert!((x - (p.wealth * (1.0 + p.safe_rate) - p.senior_debt)).abs() < 1e-9);
    }
}

#[test]
fn iteration_cap_is_reported() {
    let p = presets::tables34_market();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = sample_network(&p, 30, 70, PeerWeighting::default(), &mut rng).unwrap();
    let s = sample_shocks(&p, 70, g.eps, &mut rng).unwrap();
    let r = solve_clearing(&g, &s, &p, &ClearingOptions { max_iter: 1, ..Default::default() }).unwrap();
    if r.payments.iter().any(|&x| x < g.liability) {
        assert!(!r.converged);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_agrees_with_dense_oracle(
        n1 in 0usize..6,
        n2 in 1usize..9,
        link in prop_oneof![Just(1.0), 0.3f64..0.95],
        up in 0.2f64..0.95,
        debt in 0.0f64..27.0,
        seed in any::<u64>(),
    ) {
        let mut p = presets::tables34_market();
        p.link_probability = link;
        p.up_probability = up;
        p.senior_debt = debt;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sample_network(&p, n1, n2, PeerWeighting::default(), &mut rng).unwrap();
        let s = sample_shocks(&p, n2, g.eps, &mut rng).unwrap();
        let opts = ClearingOptions { tol: 1e-12, ..Default::default() };
        let r = solve_clearing(&g, &s, &p, &opts).unwrap();
        prop_assert!(r.converged);
        let (x, claims) = dense_clearing(&g, &s, &p, g.liability);
        for (a, b) in r.payments.iter().zip(&x) {
            prop_assert!((a - b).abs() <= 1e-8 * g.liability);
            prop_assert!(*a >= 0.0 && *a <= g.liability);
        }
        for (a, b) in r.claims.iter().zip(&claims) {
            prop_assert!((a - b).abs() <= 1e-8 * g.liability);
        }
        prop_assert!(relative_residual(&g, &s, &p, &r) <= 1e-9);
        let ret = compute_returns(&g, &r, &s, &p, 1e-9);
        prop_assert!(ret.safe.iter().chain(&ret.risky).all(|&v| v >= 0.0));
    }
}
