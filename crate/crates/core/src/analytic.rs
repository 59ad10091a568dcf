//! Large-network limits: the scalar clearing fixed point, limiting returns,
//! the probability that a safe agent out-earns a risky one, and the three
//! fraction thresholds that organise everything else.

use serde::{Deserialize, Serialize};

use crate::error::{check_fraction, Result};
use crate::model::{derive, DerivedQuantities, DynamicsParams, MarketParams};

/// Which risky agents default in the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    NoDefault,
    /// Only agents hit by the down move default.
    ShockDefault,
    /// Every risky agent defaults.
    AllDefault,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingLimit {
    /// Limiting mean clearing payment of a risky agent.
    pub x_bar: f64,
    /// Limiting default probability of a risky agent.
    pub p_d: f64,
    pub regime: Regime,
    /// Senior debt exceeds down-move proceeds; closed forms were not used.
    pub outside_theory: bool,
    /// No risky agents exist (`eps = 1`); `x_bar` is reported as the liability.
    pub degenerate: bool,
}

const PICARD_TOL: f64 = 1e-13;
const PICARD_MAX_ITER: usize = 10_000_000;

/// One application of the scalar clearing map `x -> E[min((K + c x - v)^+, y)]`.
pub fn scalar_clearing_map(dq: &DerivedQuantities, up_probability: f64, x: f64) -> f64 {
    let y = dq.liability;
    let pay = |net: f64| (net + dq.claim_coeff * x).max(0.0).min(y);
    up_probability * pay(dq.net_high) + (1.0 - up_probability) * pay(dq.net_low)
}

/// Iterates the scalar clearing map from `x = y` down to its greatest fixed point.
pub fn scalar_clearing_fixed_point(dq: &DerivedQuantities, up_probability: f64) -> f64 {
    let y = dq.liability;
    let mut x = y;
    for _ in 0..PICARD_MAX_ITER {
        let next = scalar_clearing_map(dq, up_probability, x);
        if (x - next).abs() <= PICARD_TOL * y {
            return next;
        }
        x = next;
    }
    x
}

fn regime_of(p_d: f64) -> Regime {
    if p_d <= 0.0 {
        Regime::NoDefault
    } else if p_d >= 1.0 {
        Regime::AllDefault
    } else {
        Regime::ShockDefault
    }
}

pub fn clearing_limit(params: &MarketParams, eps: f64) -> Result<ClearingLimit> {
    let dq = derive(params, eps)?;
    Ok(clearing_limit_from(params, &dq))
}

pub(crate) fn clearing_limit_from(params: &MarketParams, dq: &DerivedQuantities) -> ClearingLimit {
    let y = dq.liability;
    let delta = params.up_probability;
    if dq.eps >= 1.0 {
        return ClearingLimit {
            x_bar: y,
            p_d: 0.0,
            regime: Regime::NoDefault,
            outside_theory: false,
            degenerate: true,
        };
    }
    if dq.net_low < 0.0 {
        let x_bar = scalar_clearing_fixed_point(dq, delta);
        let slack = 1e-9 * y;
        let short = |net: f64| net + dq.claim_coeff * x_bar < y - slack;
        let mut p_d = 0.0;
        if short(dq.net_high) {
            p_d += delta;
        }
        if short(dq.net_low) {
            p_d += 1.0 - delta;
        }
        return ClearingLimit {
            x_bar,
            p_d,
            regime: regime_of(p_d),
            outside_theory: true,
            degenerate: false,
        };
    }
    let c = dq.claim_coeff;
    let (x_bar, p_d, regime) = if c >= dq.bound_no_default {
        (y, 0.0, Regime::NoDefault)
    } else if c >= dq.bound_shock_default {
        (
            (delta * y + (1.0 - delta) * dq.net_low) / (1.0 - (1.0 - delta) * c),
            1.0 - delta,
            Regime::ShockDefault,
        )
    } else {
        (dq.expected_net / (1.0 - c), 1.0, Regime::AllDefault)
    };
    ClearingLimit {
        x_bar,
        p_d,
        regime,
        outside_theory: false,
        degenerate: false,
    }
}

/// Limiting returns; the risky ones are already floored at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitReturns {
    pub safe: f64,
    pub risky_up: f64,
    pub risky_down: f64,
}

impl LimitReturns {
    pub fn risky_mean(&self, up_probability: f64) -> f64 {
        up_probability * self.risky_up + (1.0 - up_probability) * self.risky_down
    }
}

pub fn limit_returns(params: &MarketParams, eps: f64) -> Result<LimitReturns> {
    let dq = derive(params, eps)?;
    let lim = clearing_limit_from(params, &dq);
    Ok(limit_returns_from(params, &dq, &lim))
}

pub(crate) fn limit_returns_from(
    params: &MarketParams,
    dq: &DerivedQuantities,
    lim: &ClearingLimit,
) -> LimitReturns {
    let v = params.senior_debt;
    if lim.degenerate {
        return LimitReturns {
            safe: (params.wealth * (1.0 + params.safe_rate) - v).max(0.0),
            risky_up: 0.0,
            risky_down: 0.0,
        };
    }
    let safe = params.wealth * dq.eps * (1.0 + params.safe_rate) + dq.safe_claim_coeff * lim.x_bar
        - v;
    let risky = |k: f64| (k + dq.claim_coeff * lim.x_bar - v - dq.liability).max(0.0);
    LimitReturns {
        safe: safe.max(0.0),
        risky_up: risky(dq.proceeds_up),
        risky_down: risky(dq.proceeds_down),
    }
}

/// Probability that a safe agent's return is at least a risky agent's.
pub fn safe_win_probability(params: &MarketParams, eps: f64) -> Result<f64> {
    let r = limit_returns(params, eps)?;
    Ok(win_probability_of(params, &r))
}

fn win_probability_of(params: &MarketParams, r: &LimitReturns) -> f64 {
    let delta = params.up_probability;
    let mut q = 0.0;
    if r.safe >= r.risky_down {
        q += 1.0 - delta;
    }
    if r.safe >= r.risky_up {
        q += delta;
    }
    q
}

/// Limiting default probability at `eps`.
pub fn default_probability(params: &MarketParams, eps: f64) -> Result<f64> {
    Ok(clearing_limit(params, eps)?.p_d)
}

/// The fraction thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Below or at this fraction nobody defaults.
    pub default_onset: f64,
    /// Above this fraction every risky agent defaults (1 if never).
    pub systemic_onset: f64,
    /// Safe agents win every comparison from here on (1 if never below 1).
    pub switch_point: f64,
    /// The switch point located by scanning and bisecting the win probability.
    pub switch_point_scan: f64,
    pub outside_theory: bool,
}

/// `(c0, c1, c2)` with `p(x) = c0 + c1 x + c2 x^2`.
pub type Quadratic = [f64; 3];

pub fn eval_quadratic(p: &Quadratic, x: f64) -> f64 {
    p[0] + x * (p[1] + x * p[2])
}

/// Polynomial whose sign matches `claim_coeff - bound_shock_default`; its
/// first downward crossing is the systemic onset.
pub fn systemic_polynomial(params: &MarketParams) -> Quadratic {
    let w = params.wealth;
    let a = params.interbank_fraction;
    let delta = params.up_probability;
    let cushion = params.down_cushion();
    let spread = w * (params.borrow_rate - params.down_rate);
    let swing = w * (params.up_rate - params.down_rate);
    [
        a * cushion + a * delta * swing,
        cushion - a * spread + swing * (2.0 * a * delta + 1.0 - a),
        -spread + swing * (1.0 - a + a * delta),
    ]
}

/// Polynomial whose sign matches the risky up-return minus the safe return
/// while only shocked agents default; its first downward crossing past the
/// default onset is the switch point.
pub fn switch_polynomial(params: &MarketParams) -> Quadratic {
    let w = params.wealth;
    let a = params.interbank_fraction;
    let delta = params.up_probability;
    let cushion = params.down_cushion();
    let spread = w * (params.borrow_rate - params.down_rate);
    let up_borrow = w * (params.up_rate - params.borrow_rate);
    let up_safe = w * (params.up_rate - params.safe_rate);
    let lever = 1.0 - a + a * delta;
    [
        up_borrow * a * delta + (1.0 - delta) * (2.0 * a - 1.0) * cushion,
        up_borrow * lever + up_safe * a * delta + (1.0 - delta) * (cushion - (2.0 * a - 1.0) * spread),
        up_safe * lever - (1.0 - delta) * spread,
    ]
}

/// Monic form `x^2 + m1 x + m2` of [`switch_polynomial`] with its leading
/// coefficient `m3`, or `None` when that coefficient vanishes.
pub fn switch_polynomial_monic(params: &MarketParams) -> Option<(f64, f64, f64)> {
    let p = switch_polynomial(params);
    if p[2] == 0.0 {
        None
    } else {
        Some((p[1] / p[2], p[0] / p[2], p[2]))
    }
}

fn real_roots(p: &Quadratic) -> Vec<f64> {
    let [c0, c1, c2] = *p;
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if c2.abs() <= 1e-14 * scale {
        if c1.abs() <= 1e-14 * scale {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Stable pairing avoids cancellation in the smaller root.
    let qq = -0.5 * (c1 + c1.signum() * sq);
    let mut roots = if qq == 0.0 {
        vec![0.0]
    } else {
        vec![qq / c2, c0 / qq]
    };
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// First point in `[lo, hi)` at which `p` (positive at `lo`) becomes
/// non-positive and stays so just beyond; `None` if it never does.
fn first_downward_crossing(p: &Quadratic, lo: f64, hi: f64) -> Option<f64> {
    let roots: Vec<f64> = real_roots(p)
        .into_iter()
        .filter(|r| *r >= lo && *r < hi)
        .collect();
    for (i, r) in roots.iter().enumerate() {
        let next = roots.get(i + 1).copied().unwrap_or(hi);
        let probe = 0.5 * (r + next);
        if eval_quadratic(p, probe) <= 0.0 {
            return Some(*r);
        }
    }
    None
}

/// Closed-form test for an interior switch point (valid when senior debt
/// is covered by down-move proceeds).
pub fn interior_switch_condition(params: &MarketParams) -> bool {
    let w = params.wealth;
    let a = params.interbank_fraction;
    let delta = params.up_probability;
    let (u, d, rs, rb) = (
        params.up_rate,
        params.down_rate,
        params.safe_rate,
        params.borrow_rate,
    );
    let lhs = (w * (rb - d) - params.down_cushion()) / (w * (1.0 + 2.0 * a * delta - a));
    let first = lhs > (2.0 * u - rs - rb) / (2.0 * a * (1.0 - delta));
    let second = lhs > 2.0 * (u - d) / (1.0 + a) && (u - rb) / (u - d) < a * (1.0 - delta);
    first || second
}

const SCAN_POINTS: usize = 2000;
const BISECT_TOL: f64 = 1e-13;

/// First fraction in `[from, 1]` where `pred` holds, located on a grid and
/// refined by bisection; 1 if it never holds before 1.
fn scan_first(from: f64, pred: impl Fn(f64) -> bool) -> f64 {
    if pred(from) {
        return from;
    }
    let mut prev = from;
    for i in 1..=SCAN_POINTS {
        let x = from + (1.0 - from) * i as f64 / SCAN_POINTS as f64;
        if pred(x) {
            let (mut lo, mut hi) = (prev, x);
            while hi - lo > BISECT_TOL {
                let mid = 0.5 * (lo + hi);
                if pred(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return hi;
        }
        prev = x;
    }
    1.0
}

fn q_at(params: &MarketParams, eps: f64) -> f64 {
    let dq = derive(params, eps).expect("eps in range");
    let lim = clearing_limit_from(params, &dq);
    win_probability_of(params, &limit_returns_from(params, &dq, &lim))
}

fn p_d_at(params: &MarketParams, eps: f64) -> f64 {
    let dq = derive(params, eps).expect("eps in range");
    clearing_limit_from(params, &dq).p_d
}

pub fn thresholds(params: &MarketParams) -> Result<Thresholds> {
    params.validate()?;
    let switch_point_scan = scan_first(0.0, |e| q_at(params, e) >= 1.0);
    if params.down_cushion() < 0.0 {
        let default_onset = scan_first(0.0, |e| p_d_at(params, e) > 0.0);
        let systemic_onset = scan_first(default_onset, |e| p_d_at(params, e) >= 1.0);
        return Ok(Thresholds {
            default_onset,
            systemic_onset,
            switch_point: switch_point_scan,
            switch_point_scan,
            outside_theory: true,
        });
    }
    let w = params.wealth;
    let default_onset =
        (params.down_cushion() / (w * (params.borrow_rate - params.down_rate))).clamp(0.0, 1.0);
    let systemic_onset =
        first_downward_crossing(&systemic_polynomial(params), default_onset, 1.0).unwrap_or(1.0);
    let switch_point = if default_onset >= 1.0 {
        1.0
    } else {
        match first_downward_crossing(&switch_polynomial(params), default_onset, systemic_onset) {
            Some(r) => r,
            None => systemic_onset,
        }
    };
    Ok(Thresholds {
        default_onset,
        systemic_onset,
        switch_point,
        switch_point_scan,
        outside_theory: false,
    })
}

/// Drift coefficient and the flow rate that applies at `eps`.
pub fn beta_kappa(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    eps: f64,
) -> Result<(f64, f64)> {
    check_fraction("eps", eps)?;
    let th = thresholds(params)?;
    Ok(beta_kappa_with(params, dynamics, &th, eps))
}

pub fn beta_kappa_with(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    th: &Thresholds,
    eps: f64,
) -> (f64, f64) {
    let beta = dynamics.drift();
    let kappa = if eps < th.switch_point {
        beta * (1.0 - 2.0 * params.up_probability)
    } else {
        beta
    };
    (beta, kappa)
}
