use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sysrisk::harness::presets;
use sysrisk::netgen::{sample_network, sample_shocks, PeerWeighting};

#[test]
fn half_density_in_degree_is_binomial() {
    let mut p = presets::tables34_market();
    p.link_probability = 0.5;
    let (n1, n2) = (400, 600);
    let n = n1 + n2;
    let mut total = 0.0;
    let mut count = 0.0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sample_network(&p, n1, n2, PeerWeighting::default(), &mut rng).unwrap();
        for j in 0..n2 {
            total += g.in_degree(j) as f64;
            count += 1.0;
        }
    }
    let mean = total / count;
    let expected = (n - 1) as f64 * 0.5;
    let sd = ((n - 1) as f64 * 0.25 / count).sqrt();
    assert!((mean - expected).abs() <= 3.0 * sd, "{mean} vs {expected}");
}

#[test]
fn no_risky_agents_gives_empty_graph() {
    let p = presets::tables34_market();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let g = sample_network(&p, 5, 0, PeerWeighting::default(), &mut rng).unwrap();
    assert_eq!(g.n2, 0);
    assert_eq!(g.eps, 1.0);
}

#[test]
fn sure_shocks() {
    let mut p = presets::tables34_market();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    p.up_probability = 1.0;
    assert!(sample_shocks(&p, 100, 0.3, &mut rng).unwrap().up.iter().all(|&u| u));
    p.up_probability = 0.0;
    assert!(sample_shocks(&p, 100, 0.3, &mut rng).unwrap().up.iter().all(|&u| !u));
}

#[test]
fn up_fraction_concentrates() {
    let p = presets::tables34_market();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n2 = 10_000;
    let s = sample_shocks(&p, n2, 0.3, &mut rng).unwrap();
    let frac = s.up.iter().filter(|&&u| u).count() as f64 / n2 as f64;
    let sd = (0.8 * 0.2 / n2 as f64).sqrt();
    assert!((frac - 0.8).abs() <= 3.0 * sd);
    let values: std::collections::BTreeSet<u64> = s.proceeds.iter().map(|x| x.to_bits()).collect();
    assert_eq!(values.len(), 2);
}

#[test]
fn owed_amounts_sum_to_liability_on_average() {
    let mut p = presets::tables34_market();
    p.link_probability = 0.4;
    let (n1, n2) = (700, 1300);
    let mut ratio = 0.0;
    for seed in 0..30 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sample_network(&p, n1, n2, PeerWeighting::default(), &mut rng).unwrap();
        let owed: f64 = (0..n2)
            .map(|j| g.creditors(j).iter().map(|(_, w)| w * (1.0 + p.borrow_rate)).sum::<f64>())
            .sum::<f64>()
            / n2 as f64;
        ratio += owed / g.liability / 30.0;
    }
    assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
}

#[test]
fn same_seed_same_graph() {
    let mut p = presets::tables34_market();
    p.link_probability = 0.3;
    let draw = || {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = sample_network(&p, 10, 20, PeerWeighting::default(), &mut rng).unwrap();
        let s = sample_shocks(&p, 20, g.eps, &mut rng).unwrap();
        (g, s)
    };
    assert_eq!(draw(), draw());
}
