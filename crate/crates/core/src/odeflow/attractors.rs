//! Stable limits of the one-dimensional flow and their domains of attraction.

use serde::{Deserialize, Serialize};

use super::flow::{FlowField, Heading};
use crate::error::Result;
use crate::model::{DynamicsParams, MarketParams};

/// Parameter regime the classification falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeLabel {
    /// Positive drift, likely up move: limits 0 and 1 split at the switch point.
    PositiveDriftBistable,
    /// Negative drift with the switch point at an end of `[0, 1]`.
    NegativeDriftPure,
    /// Negative drift with an interior switch point: a mixed limit.
    NegativeDriftMixed,
    /// Likely down move: the sign of the drift alone decides.
    DownMoveLikely,
    /// Departures, positive drift: limits 0 and 1.
    DeparturesPositiveDrift,
    /// Departures outweigh the pull towards the switch point: only 1 attracts.
    DeparturesToSafe,
    /// Departures with both the mixed point and 1 attracting.
    DeparturesMixed,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoaInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl DoaInterval {
    pub fn contains(&self, x: f64) -> bool {
        (x > self.lo || (self.lo_closed && x == self.lo))
            && (x < self.hi || (self.hi_closed && x == self.hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attractor {
    pub eps: f64,
    pub psi: f64,
    pub doa: Vec<DoaInterval>,
    /// Held at a switching surface rather than at a zero of the field;
    /// convergence of the random process there is conjectural.
    pub conjecture: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub attractors: Vec<Attractor>,
    /// Rest points that attract nothing but themselves.
    pub repellers: Vec<f64>,
    /// Intervals on which the field vanishes identically.
    pub neutral: Vec<(f64, f64)>,
    pub regime_label: RegimeLabel,
    pub drift: f64,
    pub departures: f64,
}

impl AttractorReport {
    /// Limit reached from `eps0`, if it is one of the attractors.
    pub fn limit_from(&self, eps0: f64) -> Option<&Attractor> {
        self.attractors
            .iter()
            .find(|a| a.doa.iter().any(|d| d.contains(eps0)))
    }
}

fn label(params: &MarketParams, flow: &FlowField) -> RegimeLabel {
    let beta = flow.drift;
    let delta = params.up_probability;
    let sp = flow.thresholds.switch_point;
    if flow.departures > 0.0 {
        if delta <= 0.5 {
            return RegimeLabel::Other;
        }
        return if beta > 0.0 {
            RegimeLabel::DeparturesPositiveDrift
        } else if beta < 0.0 && beta + flow.departures > beta * sp {
            RegimeLabel::DeparturesToSafe
        } else if beta < 0.0 && beta + flow.departures < beta * sp {
            RegimeLabel::DeparturesMixed
        } else {
            RegimeLabel::Other
        };
    }
    if delta < 0.5 && beta != 0.0 {
        RegimeLabel::DownMoveLikely
    } else if delta > 0.5 && beta > 0.0 {
        RegimeLabel::PositiveDriftBistable
    } else if delta > 0.5 && beta < 0.0 {
        if sp <= 0.0 || sp >= 1.0 {
            RegimeLabel::NegativeDriftPure
        } else {
            RegimeLabel::NegativeDriftMixed
        }
    } else {
        RegimeLabel::Other
    }
}

/// Where a trajectory starting in element `i` ends up: elements alternate
/// point, open interval, point, ... Returns the index of the limit point, or
/// `None` when the start sits in a neutral interval.
fn limit_of(i: usize, points: &[f64], signs: &[i8], flow: &FlowField) -> Option<usize> {
    let last = points.len() - 1;
    let (mut j, dir) = if i % 2 == 0 {
        let p = i / 2;
        match flow.heading(points[p]) {
            Heading::Right if p < last => (p + 1, 1),
            Heading::Left if p > 0 => (p - 1, -1),
            _ => return Some(p),
        }
    } else {
        let k = i / 2;
        match signs[k] {
            0 => return None,
            s if s > 0 => (k + 1, 1),
            _ => (k, -1),
        }
    };
    // Keep moving while the next interval carries the same direction.
    loop {
        let next = if dir > 0 {
            signs.get(j).copied()
        } else if j > 0 {
            Some(signs[j - 1])
        } else {
            None
        };
        match next {
            Some(s) if s as i32 * dir > 0 => j = if dir > 0 { j + 1 } else { j - 1 },
            _ => return Some(j),
        }
    }
}

pub fn classify_attractors(params: &MarketParams, dynamics: &DynamicsParams) -> Result<AttractorReport> {
    let flow = FlowField::new(params, dynamics)?;
    classify_flow(params, &flow)
}

pub(crate) fn classify_flow(params: &MarketParams, flow: &FlowField) -> Result<AttractorReport> {
    // Critical points: knots and zeros of the affine field inside pieces.
    let knots = flow.knots();
    let mut points = knots.clone();
    for w in knots.windows(2) {
        let piece = flow.piece_at(0.5 * (w[0] + w[1]), true);
        if piece.kappa != 0.0 {
            let z = 1.0 + piece.outflow / piece.kappa;
            if z > w[0] && z < w[1] {
                points.push(z);
            }
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    let signs: Vec<i8> = points
        .windows(2)
        .map(|w| {
            let r = flow.rate(0.5 * (w[0] + w[1]));
            if r > 0.0 {
                1
            } else if r < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();

    let n_elems = 2 * points.len() - 1;
    let limits: Vec<Option<usize>> = (0..n_elems).map(|i| limit_of(i, &points, &signs, flow)).collect();
    // Attractors: limits reached from some open interval.
    let mut is_attractor = vec![false; points.len()];
    for (i, l) in limits.iter().enumerate() {
        if i % 2 == 1 {
            if let Some(p) = l {
                is_attractor[*p] = true;
            }
        }
    }
    let mut attractors = Vec::new();
    for (p, &eps) in points.iter().enumerate() {
        if !is_attractor[p] {
            continue;
        }
        let mut doa: Vec<DoaInterval> = Vec::new();
        for (i, l) in limits.iter().enumerate() {
            if *l != Some(p) {
                continue;
            }
            let piece = if i % 2 == 0 {
                let x = points[i / 2];
                DoaInterval { lo: x, hi: x, lo_closed: true, hi_closed: true }
            } else {
                let k = i / 2;
                DoaInterval { lo: points[k], hi: points[k + 1], lo_closed: false, hi_closed: false }
            };
            match doa.last_mut() {
                Some(last) if last.hi == piece.lo && (last.hi_closed || piece.lo_closed) => {
                    last.hi = piece.hi;
                    last.hi_closed = piece.hi_closed;
                }
                _ => doa.push(piece),
            }
        }
        attractors.push(Attractor {
            eps,
            psi: flow.held_psi_target(eps),
            doa,
            conjecture: eps > 0.0 && eps < 1.0 && eps == flow.thresholds.switch_point,
        });
    }
    let repellers = points
        .iter()
        .enumerate()
        .filter(|(p, _)| !is_attractor[*p] && limits[2 * p] == Some(*p))
        .map(|(_, e)| *e)
        .collect();
    let neutral = points
        .windows(2)
        .zip(&signs)
        .filter(|(_, s)| **s == 0)
        .map(|(w, _)| (w[0], w[1]))
        .collect();
    Ok(AttractorReport {
        attractors,
        repellers,
        neutral,
        regime_label: label(params, flow),
        drift: flow.drift,
        departures: flow.departures,
    })
}
