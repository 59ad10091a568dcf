//! Fixed-step RK4 on the same field, used to check the exact solutions.
//! The field is frozen to the piece the state starts a step in; leaving the
//! piece is located by bisection on the sub-step length.

use super::flow::{FlowField, Heading, OdeState, Piece};
use crate::error::{check_fraction, invalid, Error, Result};
use crate::model::{DynamicsParams, MarketParams};

const DOMAIN_SLACK: f64 = 1e-9;

fn rk4(f: impl Fn(f64, f64) -> (f64, f64), eps: f64, psi: f64, h: f64) -> (f64, f64) {
    let (a1, b1) = f(eps, psi);
    let (a2, b2) = f(eps + 0.5 * h * a1, psi + 0.5 * h * b1);
    let (a3, b3) = f(eps + 0.5 * h * a2, psi + 0.5 * h * b2);
    let (a4, b4) = f(eps + h * a3, psi + h * b3);
    (
        eps + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        psi + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
    )
}

fn piece_field(piece: Piece, mean_arrivals: f64) -> impl Fn(f64, f64) -> (f64, f64) {
    move |e, p| (e * piece.rate(e) / p, mean_arrivals - piece.outflow - p)
}

/// One sub-step of length at most `h`; returns the time actually used.
fn substep(flow: &FlowField, s: &mut OdeState, h: f64) -> Result<f64> {
    let heading = flow.heading(s.eps);
    if heading == Heading::Hold {
        let target = flow.held_psi_target(s.eps);
        let (_, psi) = rk4(|_, p| (0.0, target - p), s.eps, s.psi, h);
        s.psi = psi;
        s.t += h;
        return Ok(h);
    }
    let right = heading == Heading::Right;
    let piece = flow.piece_at(s.eps, right);
    let f = piece_field(piece, flow.mean_arrivals);
    let out_of_piece = |e: f64| if right { e >= piece.hi } else { e <= piece.lo };
    let (eps, psi) = rk4(&f, s.eps, s.psi, h);
    let (used, eps, psi) = if out_of_piece(eps) && (right || piece.lo > 0.0) {
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > 1e-14 * h.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if out_of_piece(rk4(&f, s.eps, s.psi, mid).0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (_, psi) = rk4(&f, s.eps, s.psi, hi);
        (hi, if right { piece.hi } else { piece.lo }, psi)
    } else {
        (h, eps, psi)
    };
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&eps) || !(psi > 0.0) || !psi.is_finite() {
        return Err(Error::StepRejected { t: s.t + used, eps, psi });
    }
    s.eps = eps.clamp(0.0, 1.0);
    s.psi = psi;
    s.t += used;
    Ok(used)
}

/// RK4 trajectory on `[0, horizon]` sampled every `step`, with departures as
/// configured in `dynamics`.
pub fn ode_numeric(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    eps0: f64,
    psi0: f64,
    horizon: f64,
    step: f64,
) -> Result<Vec<OdeState>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid("step", "must be positive"));
    }
    check_fraction("eps0", eps0)?;
    if !(psi0 > 0.0) {
        return Err(invalid("psi0", "must be positive"));
    }
    let flow = FlowField::new(params, dynamics)?;
    let n = (horizon / step).round() as usize;
    let mut s = OdeState { t: 0.0, eps: eps0, psi: psi0 };
    let mut out = Vec::with_capacity(n + 1);
    out.push(s);
    for i in 1..=n {
        let t_next = i as f64 * step;
        let mut left = t_next - s.t;
        while left > 1e-15 * t_next.max(1.0) {
            left -= substep(&flow, &mut s, left)?;
        }
        s.t = t_next;
        out.push(s);
    }
    Ok(out)
}
