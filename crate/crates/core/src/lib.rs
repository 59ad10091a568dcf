//! Evolutionary dynamics on random interbank liability networks.
//!
//! Agents choose each round between a safe strategy (lend to risky agents
//! and invest the rest at the safe rate) and a risky one (borrow, invest in a
//! binomial asset, lend a fraction on to peers). The crate solves the
//! finite-network clearing problem, evaluates its large-network limits,
//! integrates the mean-field flow of the population fraction, runs the
//! agent-based process and checks evolutionary stability of its limits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod clearing;
pub mod error;
pub mod ess;
pub mod harness;
pub mod odeflow;
pub mod replicator;
pub mod model;
pub mod netgen;

pub use error::{Error, Result};
pub use model::{derive, DerivedQuantities, DynamicsParams, MarketParams};
