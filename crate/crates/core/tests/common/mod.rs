//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use sysrisk::clearing::ClearingResult;
use sysrisk::netgen::{LiabilityGraph, ShockVector, Topology};
use sysrisk::MarketParams;

/// Mean clearing payment of a risky agent in the large-network limit, by
/// plain fixed-point iteration of the scalar equation from the liability.
pub fn picard_mean_payment(p: &MarketParams, eps: f64) -> (f64, f64) {
    let (w, a, v) = (p.wealth, p.interbank_fraction, p.senior_debt);
    let y = w * (eps + a) * (1.0 + p.borrow_rate) / (1.0 - a);
    let c = a * (1.0 + eps) / (a + eps);
    let up = w * (1.0 + eps) * (1.0 + p.up_rate) - v;
    let down = w * (1.0 + eps) * (1.0 + p.down_rate) - v;
    let pay = |net: f64, x: f64| (net + c * x).clamp(0.0, y);
    let mut x = y;
    for _ in 0..50_000_000 {
        let next = p.up_probability * pay(up, x) + (1.0 - p.up_probability) * pay(down, x);
        let done = (next - x).abs() <= 1e-15 * y;
        x = next;
        if done {
            break;
        }
    }
    (x, y)
}

/// Dense clearing oracle: builds the full share matrix and iterates from `start`.
pub fn dense_clearing(
    graph: &LiabilityGraph,
    shocks: &ShockVector,
    p: &MarketParams,
    start: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = graph.n();
    let n1 = graph.n1;
    let y = graph.liability;
    // share[j][i]: fraction of borrower j's payment owed to agent i.
    let mut share = vec![vec![0.0; n]; graph.n2];
    for (j, row) in share.iter_mut().enumerate() {
        for i in 0..n {
            if i == n1 + j {
                continue;
            }
            let linked = match &graph.topology {
                Topology::Complete => true,
                Topology::Sparse { creditors_of, .. } => creditors_of[j].contains(&(i as u32)),
            };
            if linked {
                let w = if i < n1 { graph.safe_edge_weight } else { graph.peer_edge_weight };
                row[i] = w * (1.0 + p.borrow_rate) / y;
            }
        }
    }
    let claims_of = |x: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..graph.n2).map(|j| share[j][i] * x[j]).sum()).collect()
    };
    let mut x = vec![start; graph.n2];
    for _ in 0..1_000_000 {
        let c = claims_of(&x);
        let next: Vec<f64> = (0..graph.n2)
            .map(|j| (shocks.proceeds[j] - p.senior_debt + c[n1 + j]).clamp(0.0, y))
            .collect();
        let diff = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        if diff <= 1e-14 * y.max(1.0) {
            break;
        }
    }
    let c = claims_of(&x);
    (x, c)
}

/// Three risky agents on a complete peer graph, each owing 0.3 of its
/// liability of 10 to each peer; no senior debt.
pub fn golden_instance() -> (LiabilityGraph, ShockVector, MarketParams) {
    let mut p = MarketParams::new(70.0, 0.0, 0.95, 0.5, 0.15, -0.6, 0.1, 0.11, 1.0).unwrap();
    p.senior_debt = 0.0;
    let y = 10.0;
    let graph = LiabilityGraph {
        n1: 0,
        n2: 3,
        eps: 0.0,
        liability: y,
        safe_edge_weight: 0.0,
        peer_edge_weight: 0.3 * y / (1.0 + p.borrow_rate),
        safe_share: 0.0,
        peer_share: 0.3,
        topology: Topology::Complete,
    };
    let shocks = ShockVector { proceeds: vec![12.0, 2.0, 2.0], up: vec![true, false, false] };
    (graph, shocks, p)
}

pub const GOLDEN_PAYMENTS: [f64; 3] = [10.0, 50.0 / 7.0, 50.0 / 7.0];

/// Closed logistic solution of `eps' = kappa eps (1 - eps) / psi` with
/// `psi' = arrivals - psi`, `psi(0) = psi0`.
pub fn logistic(eps0: f64, kappa: f64, arrivals: f64, psi0: f64, t: f64) -> f64 {
    let clock = ((arrivals * t.exp() + psi0 - arrivals) / psi0).ln() / arrivals;
    let odds = eps0 / (1.0 - eps0) * (kappa * clock).exp();
    odds / (1.0 + odds)
}

/// Finite-round approximation after `k` rounds from round 0.
pub fn finite_round(eps0: f64, kappa: f64, arrivals: f64, n0: u64, k: u64) -> f64 {
    let t: f64 = (1..=k).map(|j| 1.0 / (j as f64 + n0 as f64)).sum();
    let odds = eps0 / (1.0 - eps0) * (arrivals * t.exp() + 1.0 - arrivals).powf(kappa / arrivals);
    odds / (1.0 + odds)
}

/// Solution of `eps' = eps (kappa (1 - eps) + outflow) / psi` with
/// `psi' = arrivals - outflow - psi` on a single piece.
pub fn logistic_with_outflow(
    eps0: f64,
    kappa: f64,
    outflow: f64,
    arrivals: f64,
    psi0: f64,
    t: f64,
) -> f64 {
    let a = arrivals - outflow;
    let clock = ((a * t.exp() + psi0 - a) / psi0).ln() / a;
    let m = kappa + outflow;
    m * eps0 / (kappa * eps0 + (m - kappa * eps0) * (-m * clock).exp())
}

/// Largest componentwise residual of the clearing equations, relative to `y`.
pub fn relative_residual(
    graph: &LiabilityGraph,
    shocks: &ShockVector,
    p: &MarketParams,
    result: &ClearingResult,
) -> f64 {
    let claims = claims_from_links(graph, p, &result.payments);
    let y = graph.liability;
    result
        .payments
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let f = (shocks.proceeds[j] - p.senior_debt + claims[graph.n1 + j]).clamp(0.0, y);
            (x - f).abs() / y
        })
        .fold(0.0, f64::max)
}

/// Claims of every agent computed edge by edge from the creditor lists.
pub fn claims_from_links(graph: &LiabilityGraph, p: &MarketParams, x: &[f64]) -> Vec<f64> {
    let mut claims = vec![0.0; graph.n()];
    for (j, xj) in x.iter().enumerate() {
        for (i, w) in graph.creditors(j) {
            claims[i] += w * (1.0 + p.borrow_rate) / graph.liability * xj;
        }
    }
    claims
}
