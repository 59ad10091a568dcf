//! Clearing payments on a finite network and the resulting returns.
//!
//! Each risky agent pays `min((K_i - v + claims_i)^+, y)`, where its claims
//! are pro-rata shares of its debtors' payments. Iterating from full payment
//! gives a non-increasing sequence that converges to the greatest clearing
//! vector.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::MarketParams;
use crate::netgen::{LiabilityGraph, ShockVector, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingOptions {
    /// Tolerance relative to the liability.
    pub tol: f64,
    pub max_iter: usize,
    /// Consecutive small steps required before stopping.
    pub window: usize,
    /// Relaxation weight; 1 is plain fixed-point iteration.
    pub relaxation: f64,
}

impl Default for ClearingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
            window: 3,
            relaxation: 1.0,
        }
    }
}

impl ClearingOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be positive"));
        }
        if self.window == 0 {
            return Err(invalid("window", "must be at least 1"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(invalid("relaxation", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearingResult {
    /// Payment of each risky agent.
    pub payments: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Amount received by every agent (safe group first).
    pub claims: Vec<f64>,
}

/// Fills `claims` with what every agent receives given `payments`.
fn claims_into(graph: &LiabilityGraph, payments: &[f64], claims: &mut [f64]) {
    let n1 = graph.n1;
    match &graph.topology {
        Topology::Complete => {
            let total: f64 = payments.iter().sum();
            for c in &mut claims[..n1] {
                *c = graph.safe_share * total;
            }
            for (c, x) in claims[n1..].iter_mut().zip(payments) {
                *c = graph.peer_share * (total - x);
            }
        }
        Topology::Sparse { debtors_of, .. } => {
            for (i, (c, ds)) in claims.iter_mut().zip(debtors_of).enumerate() {
                let share = if i < n1 { graph.safe_share } else { graph.peer_share };
                *c = share * ds.iter().map(|&j| payments[j as usize]).sum::<f64>();
            }
        }
    }
}

/// One application of the clearing map.
pub fn clearing_map(
    graph: &LiabilityGraph,
    shocks: &ShockVector,
    params: &MarketParams,
    payments: &[f64],
) -> Vec<f64> {
    let mut claims = vec![0.0; graph.n()];
    claims_into(graph, payments, &mut claims);
    let y = graph.liability;
    shocks
        .proceeds
        .iter()
        .zip(&claims[graph.n1..])
        .map(|(k, c)| (k - params.senior_debt + c).max(0.0).min(y))
        .collect()
}

pub fn solve_clearing(
    graph: &LiabilityGraph,
    shocks: &ShockVector,
    params: &MarketParams,
    opts: &ClearingOptions,
) -> Result<ClearingResult> {
    opts.validate()?;
    if shocks.proceeds.len() != graph.n2 {
        return Err(invalid("shocks", "one draw per risky agent is required"));
    }
    let n2 = graph.n2;
    let y = graph.liability;
    let mut claims = vec![0.0; graph.n()];
    if y <= 0.0 || n2 == 0 {
        let payments = vec![0.0; n2];
        claims_into(graph, &payments, &mut claims);
        return Ok(ClearingResult { payments, iterations: 0, converged: true, claims });
    }
    if graph.topology == Topology::Complete {
        return Ok(solve_complete(graph, shocks, params, opts));
    }
    let v = params.senior_debt;
    let gamma = opts.relaxation;
    let mut x = vec![y; n2];
    let mut calm = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        claims_into(graph, &x, &mut claims);
        let mut sum_step = 0.0;
        let mut max_step: f64 = 0.0;
        for ((xi, k), c) in x.iter_mut().zip(&shocks.proceeds).zip(&claims[graph.n1..]) {
            let target = (k - v + c).max(0.0).min(y);
            let next = (1.0 - gamma) * *xi + gamma * target;
            debug_assert!(next <= *xi + 1e-9 * y, "iterates must not increase");
            let step = (next - *xi).abs();
            sum_step += step;
            max_step = max_step.max(step);
            *xi = next;
        }
        if sum_step == 0.0 {
            converged = true;
            break;
        }
        if sum_step < n2 as f64 * opts.tol * y && max_step <= opts.tol * y {
            calm += 1;
            if calm >= opts.window {
                converged = true;
                break;
            }
        } else {
            calm = 0;
        }
    }
    claims_into(graph, &x, &mut claims);
    Ok(ClearingResult { payments: x, iterations, converged, claims })
}

/// On the complete graph agents with equal proceeds receive equal claims at
/// every step, so the iteration runs on one value per distinct proceeds
/// level; the iterates and the stopping rule match the agent-level loop.
fn solve_complete(
    graph: &LiabilityGraph,
    shocks: &ShockVector,
    params: &MarketParams,
    opts: &ClearingOptions,
) -> ClearingResult {
    let y = graph.liability;
    let n2 = graph.n2;
    let v = params.senior_debt;
    let gamma = opts.relaxation;
    let mut levels: Vec<(f64, f64)> = Vec::new();
    let mut class_of = Vec::with_capacity(n2);
    for &k in &shocks.proceeds {
        let idx = match levels.iter().position(|(l, _)| *l == k) {
            Some(i) => i,
            None => {
                levels.push((k, 0.0));
                levels.len() - 1
            }
        };
        levels[idx].1 += 1.0;
        class_of.push(idx);
    }
    let mut x = vec![y; levels.len()];
    let mut calm = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let total: f64 = x.iter().zip(&levels).map(|(xi, (_, m))| m * xi).sum();
        let mut sum_step = 0.0;
        let mut max_step: f64 = 0.0;
        for (xi, (k, m)) in x.iter_mut().zip(&levels) {
            let claim = graph.peer_share * (total - *xi);
            let target = (k - v + claim).max(0.0).min(y);
            let next = (1.0 - gamma) * *xi + gamma * target;
            debug_assert!(next <= *xi + 1e-9 * y, "iterates must not increase");
            let step = (next - *xi).abs();
            sum_step += m * step;
            max_step = max_step.max(step);
            *xi = next;
        }
        if sum_step == 0.0 {
            converged = true;
            break;
        }
        if sum_step < n2 as f64 * opts.tol * y && max_step <= opts.tol * y {
            calm += 1;
            if calm >= opts.window {
                converged = true;
                break;
            }
        } else {
            calm = 0;
        }
    }
    let payments: Vec<f64> = class_of.iter().map(|&c| x[c]).collect();
    let mut claims = vec![0.0; graph.n()];
    claims_into(graph, &payments, &mut claims);
    ClearingResult { payments, iterations, converged, claims }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReturnsVector {
    /// Return of each safe agent.
    pub safe: Vec<f64>,
    /// Return of each risky agent.
    pub risky: Vec<f64>,
    /// Indices (within the risky group) of agents paying less than owed.
    pub defaults: Vec<usize>,
}

pub fn compute_returns(
    graph: &LiabilityGraph,
    clearing: &ClearingResult,
    shocks: &ShockVector,
    params: &MarketParams,
    tol: f64,
) -> ReturnsVector {
    let v = params.senior_debt;
    let y = graph.liability;
    let kept = params.wealth * graph.eps * (1.0 + params.safe_rate);
    let safe = clearing.claims[..graph.n1]
        .iter()
        .map(|c| (kept + c - v).max(0.0))
        .collect();
    let risky = shocks
        .proceeds
        .iter()
        .zip(&clearing.claims[graph.n1..])
        .map(|(k, c)| (k + c - v - y).max(0.0))
        .collect();
    let defaults = clearing
        .payments
        .iter()
        .enumerate()
        .filter(|(_, x)| **x < y * (1.0 - tol))
        .map(|(i, _)| i)
        .collect();
    ReturnsVector { safe, risky, defaults }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefaultStats {
    pub count: usize,
    pub fraction: f64,
    /// No risky agents; the fraction is reported as 0.
    pub degenerate: bool,
}

pub fn default_stats(clearing: &ClearingResult, liability: f64, tol: f64) -> DefaultStats {
    let n2 = clearing.payments.len();
    let count = clearing
        .payments
        .iter()
        .filter(|x| **x < liability * (1.0 - tol))
        .count();
    DefaultStats {
        count,
        fraction: if n2 == 0 { 0.0 } else { count as f64 / n2 as f64 },
        degenerate: n2 == 0,
    }
}
