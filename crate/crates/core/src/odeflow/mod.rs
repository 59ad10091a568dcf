//! Mean-field flow of the population fraction: exact piecewise solutions,
//! a Runge-Kutta cross-check, attractor classification, finite-round
//! approximations and the average-return dynamics.

mod attractors;
mod average;
mod flow;
mod numeric;

pub use attractors::{classify_attractors, Attractor, AttractorReport, DoaInterval, RegimeLabel};
pub use average::{avg_dynamics, avg_limit, balancing_fraction_limit, gap_of_average_returns, AvgLimit, AvgLimitCase};
pub use flow::{
    finite_round_estimate, ode_solution, ode_solution_departures, round_clock, FlowField,
    OdeState,
};
pub use numeric::ode_numeric;
