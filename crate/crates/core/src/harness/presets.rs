//! Parameter sets of the published experiments.

use serde::{Deserialize, Serialize};

use crate::model::{default_bound, DynamicsParams, MarketParams};

fn market(senior_debt: f64, up_probability: f64, up_rate: f64) -> MarketParams {
    MarketParams {
        wealth: 70.0,
        senior_debt,
        interbank_fraction: 0.95,
        up_probability,
        up_rate,
        down_rate: -0.6,
        safe_rate: 0.1,
        borrow_rate: 0.11,
        link_probability: 1.0,
    }
}

#[allow(clippy::too_many_arguments)]
fn dynamics(
    mean_arrivals: f64,
    mean_switch_attempts: f64,
    mean_departure_cap: f64,
    accuracy: f64,
    initial_population: u64,
    initial_fraction: f64,
    rounds: u64,
) -> DynamicsParams {
    DynamicsParams {
        mean_arrivals,
        arrival_bound: default_bound(mean_arrivals),
        mean_switch_attempts,
        switch_attempt_bound: default_bound(mean_switch_attempts),
        mean_departure_cap,
        departure_cap_bound: default_bound(mean_departure_cap),
        arrival_accuracy: accuracy,
        switch_accuracy: accuracy,
        initial_population,
        initial_fraction,
        rounds,
        departures: mean_departure_cap > 0.0,
    }
}

/// Market of the no-departure table, for a given up probability.
pub fn table2_market(up_probability: f64) -> MarketParams {
    market(20.0, up_probability, 0.15)
}

pub fn table2_dynamics(accuracy: f64, initial_fraction: f64) -> DynamicsParams {
    dynamics(1.0, 10.0, 0.0, accuracy, 300, initial_fraction, 1000)
}

/// Market shared by the departure tables and the trajectory figure.
pub fn tables34_market() -> MarketParams {
    market(15.0, 0.8, 0.13)
}

/// Perfect-information dynamics (`b = 0.8`).
pub fn table3_dynamics(initial_fraction: f64, mean_departure_cap: f64) -> DynamicsParams {
    dynamics(7.0, 6.0, mean_departure_cap, 0.8, 500, initial_fraction, 4000)
}

/// Imperfect-information dynamics (`b = 0.4`, drift -2.6).
pub fn table4_dynamics(initial_fraction: f64, mean_departure_cap: f64) -> DynamicsParams {
    dynamics(7.0, 6.0, mean_departure_cap, 0.4, 500, initial_fraction, 4000)
}

pub const FIG_TRAJECTORY_DEPARTURES: f64 = 0.84;
pub const FIG_TRAJECTORY_RESTART: u64 = 250;
pub const FIG_TRAJECTORY_STARTS: [f64; 3] = [0.2, 0.5, 0.8];

pub fn fig_trajectory_dynamics(initial_fraction: f64) -> DynamicsParams {
    table4_dynamics(initial_fraction, FIG_TRAJECTORY_DEPARTURES)
}

/// Market for the all-risky contrast: senior debt high enough that a fully
/// risky population defaults to the last agent (systemic onset 0), while a
/// population that moves to the safe side leaves almost nobody to default.
pub fn systemic_contrast_market() -> MarketParams {
    market(70.0, 0.8, 0.13)
}

/// Where a reproduced row is expected to end up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Pure(f64),
    /// The switch point of the row's market.
    SwitchPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowSpec {
    pub id: &'static str,
    pub market: MarketParams,
    pub dynamics: DynamicsParams,
    pub target: Target,
    /// Value printed in the published table for the same row.
    pub published_mc: f64,
}

pub fn table2_rows() -> Vec<RowSpec> {
    let row = |id, b, delta, eps0, target, published_mc| RowSpec {
        id,
        market: table2_market(delta),
        dynamics: table2_dynamics(b, eps0),
        target,
        published_mc,
    };
    vec![
        row("t2-r1", 0.9, 0.85, 0.85, Target::Pure(1.0), 0.9866),
        row("t2-r2", 0.9, 0.85, 0.75, Target::Pure(0.0), 0.0008),
        row("t2-r3", 0.4, 0.85, 0.8, Target::SwitchPoint, 0.8367),
        row("t2-r4", 0.9, 0.45, 0.6, Target::Pure(1.0), 0.9985),
        row("t2-r5", 0.15, 0.45, 0.2, Target::Pure(0.0), 0.0649),
    ]
}

/// Rows of the departure tables; `with_departures = false` gives the
/// companion column in which defaulters stay.
pub fn table3_rows(with_departures: bool) -> Vec<RowSpec> {
    let m = tables34_market();
    if with_departures {
        vec![
            RowSpec { id: "t3-r1", market: m, dynamics: table3_dynamics(0.4, 5.6), target: Target::Pure(1.0), published_mc: 1.0 },
            RowSpec { id: "t3-r2", market: m, dynamics: table3_dynamics(0.3, 2.1), target: Target::Pure(0.0), published_mc: 0.061 },
        ]
    } else {
        vec![
            RowSpec { id: "t3-r1-stay", market: m, dynamics: table3_dynamics(0.4, 0.0), target: Target::Pure(0.0), published_mc: 0.0429 },
            RowSpec { id: "t3-r2-stay", market: m, dynamics: table3_dynamics(0.3, 0.0), target: Target::Pure(0.0), published_mc: 0.0295 },
        ]
    }
}

pub fn table4_rows(with_departures: bool) -> Vec<RowSpec> {
    let m = tables34_market();
    if with_departures {
        vec![
            RowSpec { id: "t4-r1", market: m, dynamics: table4_dynamics(0.4, 1.75), target: Target::Pure(1.0), published_mc: 1.0 },
            RowSpec { id: "t4-r2", market: m, dynamics: table4_dynamics(0.8, 1.0), target: Target::Pure(1.0), published_mc: 1.0 },
            RowSpec { id: "t4-r3", market: m, dynamics: table4_dynamics(0.5, 0.7), target: Target::SwitchPoint, published_mc: 0.4627 },
        ]
    } else {
        vec![
            RowSpec { id: "t4-r1-stay", market: m, dynamics: table4_dynamics(0.4, 0.0), target: Target::SwitchPoint, published_mc: 0.4521 },
            RowSpec { id: "t4-r2-stay", market: m, dynamics: table4_dynamics(0.8, 0.0), target: Target::SwitchPoint, published_mc: 0.4803 },
            RowSpec { id: "t4-r3-stay", market: m, dynamics: table4_dynamics(0.5, 0.0), target: Target::SwitchPoint, published_mc: 0.4589 },
        ]
    }
}

/// Every preset row, departure tables in both variants.
pub fn all_rows() -> Vec<RowSpec> {
    let mut rows = table2_rows();
    rows.extend(table3_rows(true));
    rows.extend(table3_rows(false));
    rows.extend(table4_rows(true));
    rows.extend(table4_rows(false));
    rows
}

pub fn find_row(id: &str) -> Option<RowSpec> {
    all_rows().into_iter().find(|r| r.id == id)
}
