//! Static economy parameters, evolution parameters and the per-fraction
//! quantities derived from them.
//!
//! Throughout the crate `eps` is the fraction of agents in the safe group
//! (lenders investing the remainder at the safe rate); the other agents form
//! the risky group (borrowers investing in the binomial risky asset).

use serde::{Deserialize, Serialize};

use crate::error::{check_fraction, invalid, Result};

/// Economy parameters shared by every round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Wealth each agent brings into a round.
    pub wealth: f64,
    /// Senior obligations (taxes, deposits) paid before interbank debt.
    pub senior_debt: f64,
    /// Fraction of a risky agent's funds lent on to other risky agents.
    pub interbank_fraction: f64,
    /// Probability of the up move of the risky asset.
    pub up_probability: f64,
    pub up_rate: f64,
    pub down_rate: f64,
    pub safe_rate: f64,
    pub borrow_rate: f64,
    /// Probability that a given lender/borrower pair is linked.
    pub link_probability: f64,
}

impl MarketParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        wealth: f64,
        senior_debt: f64,
        interbank_fraction: f64,
        up_probability: f64,
        up_rate: f64,
        down_rate: f64,
        safe_rate: f64,
        borrow_rate: f64,
        link_probability: f64,
    ) -> Result<Self> {
        let p = Self {
            wealth,
            senior_debt,
            interbank_fraction,
            up_probability,
            up_rate,
            down_rate,
            safe_rate,
            borrow_rate,
            link_probability,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.wealth,
            self.senior_debt,
            self.interbank_fraction,
            self.up_probability,
            self.up_rate,
            self.down_rate,
            self.safe_rate,
            self.borrow_rate,
            self.link_probability,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(invalid("market", "all parameters must be finite"));
        }
        if self.wealth <= 0.0 {
            return Err(invalid("wealth", "must be positive"));
        }
        if self.senior_debt < 0.0 {
            return Err(invalid("senior_debt", "must be non-negative"));
        }
        if !(self.interbank_fraction > 0.0 && self.interbank_fraction < 1.0) {
            return Err(invalid("interbank_fraction", "must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.up_probability) {
            return Err(invalid("up_probability", "must lie in [0, 1]"));
        }
        if !(self.link_probability > 0.0 && self.link_probability <= 1.0) {
            return Err(invalid("link_probability", "must lie in (0, 1]"));
        }
        if self.down_rate >= self.safe_rate {
            return Err(invalid("down_rate", "must be below the safe rate"));
        }
        if self.safe_rate > self.borrow_rate {
            return Err(invalid("safe_rate", "must not exceed the borrowing rate"));
        }
        if self.borrow_rate >= self.up_rate {
            return Err(invalid("borrow_rate", "must be below the up rate"));
        }
        if self.senior_debt >= self.wealth * (1.0 + self.up_rate) {
            return Err(invalid(
                "senior_debt",
                "must be below wealth * (1 + up_rate), otherwise no outcome covers it",
            ));
        }
        Ok(())
    }

    /// Risky proceeds net of senior debt on a down move when nobody lends
    /// (`w(1+d) - v`); non-negative exactly when the limit theory applies.
    pub fn down_cushion(&self) -> f64 {
        self.wealth * (1.0 + self.down_rate) - self.senior_debt
    }

    /// Mean risky rate `u δ + d (1-δ)`.
    pub fn mean_risky_rate(&self) -> f64 {
        self.up_rate * self.up_probability + self.down_rate * (1.0 - self.up_probability)
    }
}

/// Quantities that depend on the safe-group fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub eps: f64,
    /// Liability of each risky agent, interest included.
    pub liability: f64,
    /// Share of the mean clearing payment that returns to a risky creditor.
    pub claim_coeff: f64,
    /// Share of the mean clearing payment received by a safe creditor.
    pub safe_claim_coeff: f64,
    pub proceeds_up: f64,
    pub proceeds_down: f64,
    /// Funds gathered by a risky agent before investing.
    pub accumulated: f64,
    pub net_low: f64,
    pub net_high: f64,
    pub expected_net: f64,
    /// `claim_coeff >= bound_no_default` means nobody defaults.
    pub bound_no_default: f64,
    /// `claim_coeff < bound_shock_default` means everybody defaults.
    pub bound_shock_default: f64,
}

pub fn derive(params: &MarketParams, eps: f64) -> Result<DerivedQuantities> {
    check_fraction("eps", eps)?;
    params.validate()?;
    let w = params.wealth;
    let a = params.interbank_fraction;
    let delta = params.up_probability;
    let liability = w * (eps + a) * (1.0 + params.borrow_rate) / (1.0 - a);
    let claim_coeff = a * (1.0 + eps) / (a + eps);
    let proceeds_up = w * (1.0 + eps) * (1.0 + params.up_rate);
    let proceeds_down = w * (1.0 + eps) * (1.0 + params.down_rate);
    let net_low = proceeds_down - params.senior_debt;
    let net_high = proceeds_up - params.senior_debt;
    let expected_net = delta * net_high + (1.0 - delta) * net_low;
    Ok(DerivedQuantities {
        eps,
        liability,
        claim_coeff,
        safe_claim_coeff: (1.0 - a) * (1.0 - eps) / (a + eps),
        proceeds_up,
        proceeds_down,
        accumulated: w * (1.0 + eps) / (1.0 - a),
        net_low,
        net_high,
        expected_net,
        bound_no_default: (liability - net_low) / liability,
        bound_shock_default: (liability - net_high)
            / (liability - (1.0 - delta) * (net_high - net_low)),
    })
}

/// Evolution parameters of the replicator process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub mean_arrivals: f64,
    pub arrival_bound: u64,
    pub mean_switch_attempts: f64,
    pub switch_attempt_bound: u64,
    pub mean_departure_cap: f64,
    pub departure_cap_bound: u64,
    /// Probability that an entrant reads a comparison correctly.
    pub arrival_accuracy: f64,
    /// Probability that a switching agent reads a comparison correctly.
    pub switch_accuracy: f64,
    pub initial_population: u64,
    pub initial_fraction: f64,
    pub rounds: u64,
    pub departures: bool,
}

/// Support bound used for a count with the given mean: `2 ceil(mean)`.
pub fn default_bound(mean: f64) -> u64 {
    2 * mean.max(0.0).ceil() as u64
}

impl DynamicsParams {
    /// Parameters with bounds chosen by [`default_bound`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mean_arrivals: f64,
        mean_switch_attempts: f64,
        mean_departure_cap: f64,
        arrival_accuracy: f64,
        switch_accuracy: f64,
        initial_population: u64,
        initial_fraction: f64,
        rounds: u64,
    ) -> Result<Self> {
        let d = Self {
            mean_arrivals,
            arrival_bound: default_bound(mean_arrivals),
            mean_switch_attempts,
            switch_attempt_bound: default_bound(mean_switch_attempts),
            mean_departure_cap,
            departure_cap_bound: default_bound(mean_departure_cap),
            arrival_accuracy,
            switch_accuracy,
            initial_population,
            initial_fraction,
            rounds,
            departures: mean_departure_cap > 0.0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let means = [
            self.mean_arrivals,
            self.mean_switch_attempts,
            self.mean_departure_cap,
        ];
        if means.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(invalid("dynamics", "means must be finite and non-negative"));
        }
        if self.mean_arrivals > self.arrival_bound as f64 {
            return Err(invalid("arrival_bound", "must be at least the mean"));
        }
        if self.mean_switch_attempts > self.switch_attempt_bound as f64 {
            return Err(invalid("switch_attempt_bound", "must be at least the mean"));
        }
        if self.mean_departure_cap > self.departure_cap_bound as f64 {
            return Err(invalid("departure_cap_bound", "must be at least the mean"));
        }
        if !(0.0..=1.0).contains(&self.arrival_accuracy) {
            return Err(invalid("arrival_accuracy", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.switch_accuracy) {
            return Err(invalid("switch_accuracy", "must lie in [0, 1]"));
        }
        if self.initial_population < 2 {
            return Err(invalid("initial_population", "must be at least 2"));
        }
        check_fraction("initial_fraction", self.initial_fraction)?;
        if self.departures && self.mean_departure_cap >= self.mean_arrivals {
            return Err(invalid(
                "mean_departure_cap",
                "must be below the mean number of arrivals when departures are on",
            ));
        }
        Ok(())
    }

    /// Mean departure rate seen by the flow: zero when departures are off.
    pub fn effective_departures(&self) -> f64 {
        if self.departures {
            self.mean_departure_cap
        } else {
            0.0
        }
    }

    /// Drift coefficient `(2 b_n - 1) E[N] + (2 b_s - 1) E[S]`.
    pub fn drift(&self) -> f64 {
        (2.0 * self.arrival_accuracy - 1.0) * self.mean_arrivals
            + (2.0 * self.switch_accuracy - 1.0) * self.mean_switch_attempts
    }
}
