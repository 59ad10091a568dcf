//! Evolutionary stability of candidate limits against small mutant shares.

use serde::{Deserialize, Serialize};

use crate::analytic::safe_win_probability;
use crate::error::{check_fraction, invalid, Result};
use crate::model::{DynamicsParams, MarketParams};
use crate::odeflow::{avg_dynamics, gap_of_average_returns};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EssMode {
    SwitchUtility,
    AvgReturnUtility,
    MultiMutation,
}

/// Which utility a multi-mutation check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UtilityKind {
    /// Expected gain from imitation encounters.
    Switch,
    /// Expected return.
    AverageReturn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssVerdict {
    pub candidate: f64,
    pub is_ess: bool,
    /// Smallest advantage of the candidate over a mutant seen on the grid;
    /// negative when some mutant does at least as well.
    pub margin: f64,
    /// Largest mutant share that works for every mutant.
    pub x_bar_used: Option<f64>,
    pub mode: EssMode,
    /// Drift and switching accuracy point the same way.
    pub predominant_switching: bool,
    /// A mutant (or profile index) that invades, if any.
    pub invader: Option<f64>,
    /// The return gap changes sign more than once, or the candidate is not
    /// a rest point of the average dynamics.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssGrids {
    pub mutants: Vec<f64>,
    pub shares: Vec<f64>,
}

impl Default for EssGrids {
    fn default() -> Self {
        Self {
            mutants: (0..=100).map(|i| i as f64 / 100.0).collect(),
            shares: vec![1e-3, 1e-2, 0.05, 0.1],
        }
    }
}

impl EssGrids {
    /// Mutants excluding `candidate`, shares sorted ascending.
    fn for_candidate(&self, candidate: f64) -> (Vec<f64>, Vec<f64>) {
        let mutants = self
            .mutants
            .iter()
            .copied()
            .filter(|m| (m - candidate).abs() > 1e-12)
            .collect();
        let mut shares = self.shares.clone();
        shares.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (mutants, shares)
    }
}

fn predominant(dynamics: &DynamicsParams) -> bool {
    let beta = dynamics.drift();
    let s = 2.0 * dynamics.switch_accuracy - 1.0;
    beta != 0.0 && s != 0.0 && beta.signum() == s.signum()
}

fn mix(mutant: f64, candidate: f64, x: f64) -> f64 {
    (x * mutant + (1.0 - x) * candidate).clamp(0.0, 1.0)
}

/// Mutant utility minus incumbent utility under the imitation fitness.
pub fn switch_utility_gap(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    eps_mut: f64,
    eps_cand: f64,
    x: f64,
) -> Result<f64> {
    check_fraction("eps_mut", eps_mut)?;
    check_fraction("eps_cand", eps_cand)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(invalid("x", "mutant share must lie in (0, 1)"));
    }
    let q = safe_win_probability(params, mix(eps_mut, eps_cand, x))?;
    Ok((eps_mut - eps_cand) * (2.0 * q - 1.0) * (2.0 * dynamics.switch_accuracy - 1.0))
}

/// Scans mutants and shares; `advantage(m, x)` is the incumbent's edge.
fn scan(
    candidate: f64,
    grids: &EssGrids,
    mode: EssMode,
    predominant_switching: bool,
    mut advantage: impl FnMut(f64, f64) -> Result<f64>,
) -> Result<EssVerdict> {
    let (mutants, shares) = grids.for_candidate(candidate);
    let mut margin = f64::INFINITY;
    let mut x_bar_used: Option<f64> = None;
    let mut invader = None;
    for m in mutants {
        let mut workable = None;
        let mut local = f64::INFINITY;
        for &x in &shares {
            let adv = advantage(m, x)?;
            if adv > 0.0 {
                workable = Some(x);
                local = local.min(adv);
            } else {
                if workable.is_none() {
                    local = adv;
                }
                break;
            }
        }
        margin = margin.min(local);
        match workable {
            Some(x) => x_bar_used = Some(x_bar_used.map_or(x, |u: f64| u.min(x))),
            None => {
                invader.get_or_insert(m);
            }
        }
    }
    let is_ess = invader.is_none();
    Ok(EssVerdict {
        candidate,
        is_ess,
        margin,
        x_bar_used: if is_ess { x_bar_used } else { None },
        mode,
        predominant_switching,
        invader,
        flagged: false,
    })
}

/// Mixed-strategy stability under the imitation fitness: every mutant must
/// do strictly worse for all tested shares up to some threshold.
pub fn check_mixed_ess(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    candidate: f64,
    grids: &EssGrids,
) -> Result<EssVerdict> {
    check_fraction("candidate", candidate)?;
    scan(candidate, grids, EssMode::SwitchUtility, predominant(dynamics), |m, x| {
        Ok(-switch_utility_gap(params, dynamics, m, candidate, x)?)
    })
}

/// Stability when utility is the expected return.
pub fn check_avg_ess(
    params: &MarketParams,
    candidate: f64,
    cbar: f64,
    grids: &EssGrids,
) -> Result<EssVerdict> {
    check_fraction("candidate", candidate)?;
    let rest = avg_dynamics(params, cbar, candidate)?.abs() <= 1e-9;
    let gaps: Vec<f64> = (1..1000)
        .map(|i| gap_of_average_returns(params, i as f64 / 1000.0))
        .collect::<Result<_>>()?;
    let changes = gaps.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
    let mut v = scan(candidate, grids, EssMode::AvgReturnUtility, true, |m, x| {
        Ok((candidate - m) * gap_of_average_returns(params, mix(m, candidate, x))?)
    })?;
    v.flagged = changes > 1 || !rest;
    v.is_ess = v.is_ess && rest;
    Ok(v)
}

fn utility(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    kind: UtilityKind,
    strategy: f64,
    population: f64,
) -> Result<f64> {
    let (u_safe, u_risky) = match kind {
        UtilityKind::Switch => {
            let q = safe_win_probability(params, population)?;
            let s = (2.0 * q - 1.0) * (2.0 * dynamics.switch_accuracy - 1.0);
            ((1.0 - population) * s, -population * s)
        }
        UtilityKind::AverageReturn => {
            let g = gap_of_average_returns(params, population)?;
            (g, 0.0)
        }
    };
    Ok(strategy * u_safe + (1.0 - strategy) * u_risky)
}

/// A set of simultaneous mutants: `(strategy, share)` pairs.
pub type MutantProfile = Vec<(f64, f64)>;

/// Stability when several mutants are present at once.
pub fn check_multi_mutation(
    params: &MarketParams,
    dynamics: &DynamicsParams,
    candidate: f64,
    profiles: &[MutantProfile],
    kind: UtilityKind,
) -> Result<EssVerdict> {
    check_fraction("candidate", candidate)?;
    let mut margin = f64::INFINITY;
    let mut invader = None;
    let mut largest_share: f64 = 0.0;
    for (idx, profile) in profiles.iter().enumerate() {
        let total: f64 = profile.iter().map(|(_, x)| x).sum();
        if !(total > 0.0 && total < 1.0) {
            return Err(invalid("profile", "mutant shares must sum to a value in (0, 1)"));
        }
        largest_share = largest_share.max(total);
        let pop = (profile.iter().map(|(e, x)| e * x).sum::<f64>() + (1.0 - total) * candidate)
            .clamp(0.0, 1.0);
        let incumbent = utility(params, dynamics, kind, candidate, pop)?;
        for &(e, _) in profile {
            check_fraction("mutant", e)?;
            let adv = incumbent - utility(params, dynamics, kind, e, pop)?;
            margin = margin.min(adv);
            if adv <= 0.0 && invader.is_none() {
                invader = Some(idx as f64);
            }
        }
    }
    Ok(EssVerdict {
        candidate,
        is_ess: invader.is_none(),
        margin,
        x_bar_used: invader.is_none().then_some(largest_share),
        mode: EssMode::MultiMutation,
        predominant_switching: kind == UtilityKind::AverageReturn || predominant(dynamics),
        invader,
        flagged: false,
    })
}

/// Pairs of distinct mutants on a coarse grid at a few small equal shares.
pub fn default_profiles(candidate: f64) -> Vec<MutantProfile> {
    let grid: Vec<f64> = (0..=20)
        .map(|i| i as f64 / 20.0)
        .filter(|m| (m - candidate).abs() > 1e-12)
        .collect();
    let mut out = Vec::new();
    for x in [1e-3, 1e-2, 0.05] {
        for (i, &a) in grid.iter().enumerate() {
            out.push(vec![(a, x)]);
            for &b in &grid[i + 1..] {
                out.push(vec![(a, x), (b, x)]);
            }
        }
    }
    out
}
