//! The agent-based process: each round agents play, observe returns, some
//! imitate a contacted agent, some defaulters leave and entrants pick a side
//! by comparing two sampled agents.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::clearing::{compute_returns, default_stats, solve_clearing, ClearingOptions, ReturnsVector};
use crate::error::{invalid, Result};
use crate::model::{DynamicsParams, MarketParams};
use crate::netgen::{sample_network, sample_network_fixed, sample_shocks, PeerWeighting};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimOptions {
    pub weighting: PeerWeighting,
    pub clearing: ClearingOptions,
    /// Keep each pair's link across rounds instead of redrawing it.
    pub fixed_links: bool,
    /// Replace random counts by their running integer parts.
    pub deterministic_counts: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub market: MarketParams,
    pub dynamics: DynamicsParams,
    pub options: SimOptions,
}

impl SimConfig {
    pub fn new(market: MarketParams, dynamics: DynamicsParams) -> Self {
        Self { market, dynamics, options: SimOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.market.validate()?;
        self.dynamics.validate()?;
        self.options.clearing.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    pub round: u64,
    pub n1: usize,
    pub n2: usize,
    /// Agent identities by group; only tracked when links are fixed.
    pub safe_ids: Vec<u64>,
    pub risky_ids: Vec<u64>,
    pub next_id: u64,
    pub last_returns: Option<ReturnsVector>,
}

impl PopulationState {
    pub fn initial(dynamics: &DynamicsParams, track_ids: bool) -> Self {
        let n0 = dynamics.initial_population as usize;
        let n1 = (dynamics.initial_fraction * n0 as f64).round() as usize;
        let n2 = n0 - n1;
        let (safe_ids, risky_ids) = if track_ids {
            ((0..n1 as u64).collect(), (n1 as u64..n0 as u64).collect())
        } else {
            (Vec::new(), Vec::new())
        };
        Self {
            round: 0,
            n1,
            n2,
            safe_ids,
            risky_ids,
            next_id: n0 as u64,
            last_returns: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn eps(&self) -> f64 {
        if self.n() == 0 {
            1.0
        } else {
            self.n1 as f64 / self.n() as f64
        }
    }

    pub fn psi(&self, initial_population: u64) -> f64 {
        self.n() as f64 / (self.round + initial_population) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub n: usize,
    pub n1: usize,
    pub eps: f64,
    pub psi: f64,
    pub default_frac: f64,
    pub arrivals: u64,
    /// Entrants joining the safe group.
    pub xi: u64,
    pub to_safe: u64,
    pub to_risky: u64,
    pub departures: u64,
    pub mean_r1: f64,
    pub mean_r2: f64,
    pub seed: u64,
    pub converged: bool,
    /// Departures were cut to keep at least two agents.
    pub guard_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub records: Vec<RoundRecord>,
    pub final_n: usize,
    pub final_n1: usize,
}

impl Trajectory {
    pub fn final_eps(&self) -> f64 {
        self.final_n1 as f64 / self.final_n as f64
    }
}

/// Count with the given mean and bound for round `k`.
pub fn draw_count<R: Rng + ?Sized>(
    mean: f64,
    bound: u64,
    deterministic: bool,
    k: u64,
    rng: &mut R,
) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if deterministic {
        return ((k + 1) as f64 * mean).floor() as u64 - (k as f64 * mean).floor() as u64;
    }
    let trials = bound.max(mean.ceil() as u64);
    Binomial::new(trials, (mean / trials as f64).min(1.0))
        .expect("valid binomial")
        .sample(rng)
}

fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

const LINK_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Plays one round and applies the population changes it causes.
pub fn step_round(
    state: &PopulationState,
    config: &SimConfig,
    seed: u64,
) -> Result<(PopulationState, RoundRecord)> {
    let (market, dynamics, opts) = (&config.market, &config.dynamics, &config.options);
    let (n1, n2) = (state.n1, state.n2);
    let n = n1 + n2;
    if n < 2 {
        return Err(invalid("population", "at least two agents are needed"));
    }
    let k = state.round;
    let mut rng = round_rng(seed, k);
    let track_ids = opts.fixed_links && market.link_probability < 1.0;

    // Play the round.
    let graph = if track_ids {
        let ids: Vec<u64> = state.safe_ids.iter().chain(&state.risky_ids).copied().collect();
        sample_network_fixed(market, n1, n2, &ids, seed ^ LINK_SALT, opts.weighting)?
    } else {
        sample_network(market, n1, n2, opts.weighting, &mut rng)?
    };
    let shocks = sample_shocks(market, n2, graph.eps, &mut rng)?;
    let clearing = solve_clearing(&graph, &shocks, market, &opts.clearing)?;
    let returns = compute_returns(&graph, &clearing, &shocks, market, opts.clearing.tol);
    let stats = default_stats(&clearing, graph.liability, opts.clearing.tol);
    let ret_of = |agent: usize| {
        if agent < n1 {
            returns.safe[agent]
        } else {
            returns.risky[agent - n1]
        }
    };

    // Switching: attempters imitate a contacted agent of the other group.
    let attempts = draw_count(
        dynamics.mean_switch_attempts,
        dynamics.switch_attempt_bound,
        opts.deterministic_counts,
        k,
        &mut rng,
    )
    .min(n as u64) as usize;
    let mut switched = vec![false; n];
    let (mut to_safe, mut to_risky) = (0u64, 0u64);
    for a in sample(&mut rng, n, attempts).into_iter() {
        let mut c = rng.random_range(0..n - 1);
        if c >= a {
            c += 1;
        }
        let (a_safe, c_safe) = (a < n1, c < n1);
        if a_safe == c_safe {
            continue;
        }
        let contact_better = if c_safe {
            ret_of(c) >= ret_of(a)
        } else {
            ret_of(c) > ret_of(a)
        };
        let misread = !rng.random_bool(dynamics.switch_accuracy);
        if contact_better != misread {
            switched[a] = true;
            if a_safe {
                to_risky += 1;
            } else {
                to_safe += 1;
            }
        }
    }

    // Departures: unswitched defaulters, capped.
    let arrivals = draw_count(
        dynamics.mean_arrivals,
        dynamics.arrival_bound,
        opts.deterministic_counts,
        k,
        &mut rng,
    );
    let mut leaving: Vec<usize> = Vec::new();
    let mut guard_hit = false;
    if dynamics.departures {
        let cap = draw_count(
            dynamics.mean_departure_cap,
            dynamics.departure_cap_bound,
            opts.deterministic_counts,
            k,
            &mut rng,
        ) as usize;
        let eligible: Vec<usize> = returns
            .defaults
            .iter()
            .copied()
            .filter(|&j| !switched[n1 + j])
            .collect();
        let room = (n + arrivals as usize).saturating_sub(2);
        let mut d = cap.min(eligible.len());
        if d > room {
            d = room;
            guard_hit = true;
        }
        leaving = sample(&mut rng, eligible.len(), d)
            .into_iter()
            .map(|i| eligible[i])
            .collect();
    }

    // Arrivals compare two distinct agents of this round.
    let mut xi = 0u64;
    for _ in 0..arrivals {
        let pair = sample(&mut rng, n, 2);
        let (a, b) = (pair.index(0), pair.index(1));
        let joins_safe = match (a < n1, b < n1) {
            (true, true) => true,
            (false, false) => false,
            _ => {
                let (s, r) = if a < n1 { (a, b) } else { (b, a) };
                let safe_better = ret_of(s) >= ret_of(r);
                safe_better != !rng.random_bool(dynamics.arrival_accuracy)
            }
        };
        if joins_safe {
            xi += 1;
        }
    }

    let departures = leaving.len() as u64;
    let new_n1 = n1 as u64 + xi + to_safe - to_risky;
    let new_n2 = n2 as u64 + (arrivals - xi) + to_risky - to_safe - departures;

    let (safe_ids, risky_ids, next_id) = if track_ids {
        let mut gone = vec![false; n2];
        for &j in &leaving {
            gone[j] = true;
        }
        let mut safe: Vec<u64> = Vec::with_capacity(new_n1 as usize);
        let mut risky: Vec<u64> = Vec::with_capacity(new_n2 as usize);
        for (i, id) in state.safe_ids.iter().enumerate() {
            if switched[i] { risky.push(*id) } else { safe.push(*id) }
        }
        for (j, id) in state.risky_ids.iter().enumerate() {
            if switched[n1 + j] {
                safe.push(*id)
            } else if !gone[j] {
                risky.push(*id)
            }
        }
        let mut next = state.next_id;
        for i in 0..arrivals {
            if i < xi { safe.push(next) } else { risky.push(next) }
            next += 1;
        }
        (safe, risky, next)
    } else {
        (Vec::new(), Vec::new(), state.next_id + arrivals)
    };

    let record = RoundRecord {
        round: k,
        n,
        n1,
        eps: state.eps(),
        psi: state.psi(dynamics.initial_population),
        default_frac: stats.fraction,
        arrivals,
        xi,
        to_safe,
        to_risky,
        departures,
        mean_r1: mean(&returns.safe),
        mean_r2: mean(&returns.risky),
        seed,
        converged: clearing.converged,
        guard_hit,
    };
    let next = PopulationState {
        round: k + 1,
        n1: new_n1 as usize,
        n2: new_n2 as usize,
        safe_ids,
        risky_ids,
        next_id,
        last_returns: Some(returns),
    };
    Ok((next, record))
}

pub fn run_simulation(config: &SimConfig, seed: u64) -> Result<Trajectory> {
    config.validate()?;
    let track = config.options.fixed_links && config.market.link_probability < 1.0;
    let mut state = PopulationState::initial(&config.dynamics, track);
    let mut records = Vec::with_capacity(config.dynamics.rounds as usize);
    for _ in 0..config.dynamics.rounds {
        let (next, rec) = step_round(&state, config, seed)?;
        records.push(rec);
        state = next;
        state.last_returns = None;
    }
    Ok(Trajectory { seed, records, final_n: state.n(), final_n1: state.n1 })
}

/// Mean fraction over the last `tail_window` rounds (a tenth of the run by
/// default).
pub fn estimate_limit(trajectory: &Trajectory, tail_window: Option<usize>) -> f64 {
    let len = trajectory.records.len();
    if len == 0 {
        return trajectory.final_eps();
    }
    let w = tail_window.unwrap_or((len / 10).max(1)).clamp(1, len);
    trajectory.records[len - w..].iter().map(|r| r.eps).sum::<f64>() / w as f64
}

/// Mean realised default fraction over the last `tail_window` rounds.
pub fn tail_default_fraction(trajectory: &Trajectory, tail_window: Option<usize>) -> f64 {
    let len = trajectory.records.len();
    if len == 0 {
        return 0.0;
    }
    let w = tail_window.unwrap_or((len / 10).max(1)).clamp(1, len);
    trajectory.records[len - w..].iter().map(|r| r.default_frac).sum::<f64>() / w as f64
}

/// Mean share of the whole population that defaulted over the last
/// `tail_window` rounds (safe agents never default).
pub fn tail_population_default_fraction(trajectory: &Trajectory, tail_window: Option<usize>) -> f64 {
    let len = trajectory.records.len();
    if len == 0 {
        return 0.0;
    }
    let w = tail_window.unwrap_or((len / 10).max(1)).clamp(1, len);
    trajectory.records[len - w..]
        .iter()
        .map(|r| r.default_frac * (r.n - r.n1) as f64 / r.n as f64)
        .sum::<f64>()
        / w as f64
}
