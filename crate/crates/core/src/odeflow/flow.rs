use serde::{Deserialize, Serialize};

use crate::analytic::{thresholds, Thresholds};
use crate::error::{check_fraction, invalid, Error, Result};
use crate::model::{DynamicsParams, MarketParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub t: f64,
    pub eps: f64,
    pub psi: f64,
}

/// Direction the flow takes from a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Heading {
    Left,
    Right,
    Hold,
}

/// Constants of the flow on one open piece between breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kappa: f64,
    /// Departure rate in force (`E[L]` or 0).
    pub outflow: f64,
}

impl Piece {
    /// `F(eps) = kappa (1 - eps) + outflow`.
    pub fn rate(&self, eps: f64) -> f64 {
        self.kappa * (1.0 - eps) + self.outflow
    }
}

/// The right-hand side `eps' = eps F(eps) / psi`, `psi' = E[N] - outflow - psi`
/// with `F` piecewise affine in `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub thresholds: Thresholds,
    pub drift: f64,
    pub kappa_below: f64,
    pub kappa_above: f64,
    pub mean_arrivals: f64,
    pub departures: f64,
    breaks: Vec<f64>,
}

impl FlowField {
    /// Flow with departures as configured in `dynamics`.
    pub fn new(params: &MarketParams, dynamics: &DynamicsParams) -> Result<Self> {
        Self::build(params, dynamics, dynamics.effective_departures())
    }

    /// Flow with departures switched off.
    pub fn without_departures(params: &MarketParams, dynamics: &DynamicsParams) -> Result<Self> {
        Self::build(params, dynamics, 0.0)
    }

    fn build(params: &MarketParams, dynamics: &DynamicsParams, departures: f64) -> Result<Self> {
        let th = thresholds(params)?;
        if departures > 0.0 && departures >= dynamics.mean_arrivals {
            return Err(invalid(
                "mean_departure_cap",
                "must be below the mean number of arrivals",
            ));
        }
        let drift = dynamics.drift();
        let mut breaks = Vec::new();
        if departures > 0.0 && th.default_onset > 0.0 && th.default_onset < 1.0 {
            breaks.push(th.default_onset);
        }
        if th.switch_point > 0.0 && th.switch_point < 1.0 && !breaks.contains(&th.switch_point) {
            breaks.push(th.switch_point);
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self {
            thresholds: th,
            drift,
            kappa_below: drift * (1.0 - 2.0 * params.up_probability),
            kappa_above: drift,
            mean_arrivals: dynamics.mean_arrivals,
            departures,
            breaks,
        })
    }

    pub fn kappa(&self, eps: f64) -> f64 {
        if eps < self.thresholds.switch_point {
            self.kappa_below
        } else {
            self.kappa_above
        }
    }

    /// Whether defaulters leave at `eps`.
    pub fn departing(&self, eps: f64) -> bool {
        self.departures > 0.0 && eps > self.thresholds.default_onset && eps < 1.0
    }

    /// The factor `F` with `eps' = eps F / psi`.
    pub fn rate(&self, eps: f64) -> f64 {
        let out = if self.departing(eps) { self.departures } else { 0.0 };
        self.kappa(eps) * (1.0 - eps) + out
    }

    pub fn rhs(&self, eps: f64, psi: f64) -> (f64, f64) {
        let out = if self.departing(eps) { self.departures } else { 0.0 };
        (eps * self.rate(eps) / psi, self.mean_arrivals - out - psi)
    }

    /// Interior points where the field changes.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// All piece boundaries, including 0 and 1.
    pub(crate) fn knots(&self) -> Vec<f64> {
        let mut k = vec![0.0];
        k.extend_from_slice(&self.breaks);
        k.push(1.0);
        k
    }

    /// The piece containing `eps` in its interior, or the one on `side` of
    /// a knot.
    pub(crate) fn piece_at(&self, eps: f64, right: bool) -> Piece {
        let knots = self.knots();
        let mut i = 0;
        while i + 2 < knots.len() && (eps > knots[i + 1] || (right && eps >= knots[i + 1])) {
            i += 1;
        }
        let (lo, hi) = (knots[i], knots[i + 1]);
        let mid = 0.5 * (lo + hi);
        Piece {
            lo,
            hi,
            kappa: self.kappa(mid),
            outflow: if self.departing(mid) { self.departures } else { 0.0 },
        }
    }

    /// Which way the flow leaves a knot (or any point).
    pub(crate) fn heading(&self, eps: f64) -> Heading {
        if eps <= 0.0 || eps >= 1.0 {
            return Heading::Hold;
        }
        if !self.breaks.contains(&eps) {
            let piece = self.piece_at(eps, true);
            let r = piece.rate(eps);
            let scale = piece.kappa.abs() + piece.outflow;
            return if r.abs() <= 1e-12 * scale {
                Heading::Hold
            } else if r > 0.0 {
                Heading::Right
            } else if r < 0.0 {
                Heading::Left
            } else {
                Heading::Hold
            };
        }
        let left = self.piece_at(eps, false).rate(eps);
        let right = self.piece_at(eps, true).rate(eps);
        if right > 0.0 {
            Heading::Right
        } else if left < 0.0 {
            Heading::Left
        } else {
            Heading::Hold
        }
    }

    /// Asymptotic level of `psi` while the state is held at knot `eps`.
    pub(crate) fn held_psi_target(&self, eps: f64) -> f64 {
        if eps <= 0.0 || eps >= 1.0 || !self.breaks.contains(&eps) {
            let out = if self.departing(eps) { self.departures } else { 0.0 };
            return self.mean_arrivals - out;
        }
        let l = self.piece_at(eps, false);
        let r = self.piece_at(eps, true);
        let (fl, fr) = (l.rate(eps), r.rate(eps));
        // Filippov weight of the left field that cancels the eps motion.
        let weight = if fl == fr { 0.5 } else { (fr / (fr - fl)).clamp(0.0, 1.0) };
        self.mean_arrivals - weight * l.outflow - (1.0 - weight) * r.outflow
    }

    /// Advances `state` to time `t_end` along the exact piecewise solution.
    pub fn advance(&self, state: OdeState, t_end: f64) -> Result<OdeState> {
        check_fraction("eps", state.eps)?;
        if !(state.psi > 0.0) || !state.psi.is_finite() {
            return Err(Error::OutOfDomain {
                name: "psi",
                value: state.psi,
                domain: "(0, inf)",
            });
        }
        let mut s = state;
        let mut guard = 0;
        while s.t < t_end {
            guard += 1;
            if guard > 64 {
                return Err(Error::Degenerate(format!(
                    "flow did not settle after {guard} piece changes"
                )));
            }
            let span = t_end - s.t;
            match self.heading(s.eps) {
                Heading::Hold => {
                    let target = self.held_psi_target(s.eps);
                    s.psi = relax(target, s.psi, span);
                    s.t = t_end;
                }
                h => {
                    let piece = self.piece_at(s.eps, h == Heading::Right);
                    let seg = Segment::new(&piece, self.mean_arrivals, s)?;
                    let crossed = |dt: f64| seg.crossed(dt, h == Heading::Right);
                    if !crossed(span) {
                        s = seg.at(span);
                        s.t = t_end;
                    } else {
                        let hit = first_crossing(span, crossed);
                        let mut next = seg.at(hit);
                        next.eps = if h == Heading::Right { piece.hi } else { piece.lo };
                        s = next;
                    }
                }
            }
        }
        Ok(s)
    }

    /// States at each of `times` (non-decreasing, starting at or after `state.t`).
    pub fn trajectory(&self, state: OdeState, times: &[f64]) -> Result<Vec<OdeState>> {
        let mut out = Vec::with_capacity(times.len());
        let mut s = state;
        for &t in times {
            s = self.advance(s, t)?;
            s.t = t;
            out.push(s);
        }
        Ok(out)
    }
}

/// `psi` relaxed towards `target` for `span` time units.
fn relax(target: f64, psi: f64, span: f64) -> f64 {
    target + (psi - target) * (-span).exp()
}

/// Closed-form solution on one piece, started from `start`.
struct Segment {
    start: OdeState,
    kappa: f64,
    growth: f64,
    psi_target: f64,
    hi: f64,
    lo: f64,
}

impl Segment {
    fn new(piece: &Piece, mean_arrivals: f64, start: OdeState) -> Result<Self> {
        let growth = piece.kappa + piece.outflow;
        if growth == 0.0 && piece.kappa != 0.0 && piece.outflow > 0.0 {
            return Err(Error::Degenerate(format!(
                "growth constant vanishes on [{}, {}]",
                piece.lo, piece.hi
            )));
        }
        Ok(Self {
            start,
            kappa: piece.kappa,
            growth,
            psi_target: mean_arrivals - piece.outflow,
            hi: piece.hi,
            lo: piece.lo,
        })
    }

    /// Integrated clock `int_0^dt ds / psi(s)`.
    fn clock(&self, dt: f64) -> f64 {
        let a = self.psi_target;
        let p0 = self.start.psi;
        let e = dt.exp_m1();
        if (a * e / p0).abs() < 1e-300 || a.abs() < 1e-14 {
            e / p0
        } else {
            (a * e / p0).ln_1p() / a
        }
    }

    /// `(eps, denominator)`; a non-positive denominator means the logistic
    /// curve has already passed through 1.
    fn eps_at(&self, dt: f64) -> (f64, f64) {
        let e0 = self.start.eps;
        let tau = self.clock(dt);
        let (k, m) = (self.kappa, self.growth);
        if k == 0.0 {
            return ((e0 * (m * tau).exp()), 1.0);
        }
        if m == 0.0 {
            let den = 1.0 + k * e0 * tau;
            return (e0 / den, den);
        }
        let decay = (-m * tau).exp();
        if decay.is_finite() {
            let den = k * e0 + (m - k * e0) * decay;
            (m * e0 / den, den * m.signum())
        } else {
            let g = (m * tau).exp();
            let den = k * e0 * g + (m - k * e0);
            (m * e0 * g / den, den * m.signum())
        }
    }

    fn crossed(&self, dt: f64, rightward: bool) -> bool {
        let (eps, den) = self.eps_at(dt);
        if den <= 0.0 || !eps.is_finite() {
            return true;
        }
        if rightward {
            eps >= self.hi
        } else {
            eps <= self.lo
        }
    }

    fn at(&self, dt: f64) -> OdeState {
        let (eps, _) = self.eps_at(dt);
        OdeState {
            t: self.start.t + dt,
            eps: eps.clamp(self.lo, self.hi),
            psi: relax(self.psi_target, self.start.psi, dt),
        }
    }
}

/// Smallest `dt` in `(0, span]` with `crossed(dt)`, to 1e-12.
fn first_crossing(span: f64, crossed: impl Fn(f64) -> bool) -> f64 {
    let (mut lo, mut hi) = (0.0, span);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if crossed(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Flow solution without departures.
pub fn ode_solution(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    eps0: f64,
    psi0: f64,
    t: f64,
) -> Result<OdeState> {
    let flow = FlowField::without_departures(params, dynamics)?;
    flow.advance(OdeState { t: 0.0, eps: eps0, psi: psi0 }, t)
}

/// Flow solution with defaulters leaving as configured in `dynamics`.
pub fn ode_solution_departures(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    eps0: f64,
    psi0: f64,
    t: f64,
) -> Result<OdeState> {
    let flow = FlowField::new(params, dynamics)?;
    flow.advance(OdeState { t: 0.0, eps: eps0, psi: psi0 }, t)
}

/// Flow time elapsed over `k` rounds starting after round `l`:
/// `sum_{j=l+1}^{l+k} 1 / (j + n0 + l)`.
pub fn round_clock(initial_population: u64, l: u64, k: u64) -> f64 {
    let n0 = initial_population as f64;
    let l_f = l as f64;
    (l + 1..=l + k).map(|j| 1.0 / (j as f64 + n0 + l_f)).sum()
}

/// Approximate fraction after `k` further rounds from `eps0` at round `l`:
/// the flow run for [`round_clock`] time units from `psi = 1`.
pub fn finite_round_estimate(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    eps0: f64,
    l: u64,
    k: u64,
) -> Result<f64> {
    check_fraction("eps0", eps0)?;
    let flow = FlowField::without_departures(params, dynamics)?;
    let t = round_clock(dynamics.initial_population, l, k);
    Ok(flow.advance(OdeState { t: 0.0, eps: eps0, psi: 1.0 }, t)?.eps)
}
