//! Dynamics when entrants compare noisy estimates of the two groups'
//! average returns instead of two sampled agents.

use serde::{Deserialize, Serialize};

use crate::analytic::limit_returns;
use crate::error::{check_fraction, invalid, Result};
use crate::model::MarketParams;

/// Expected safe return minus expected risky return at `eps`.
pub fn gap_of_average_returns(params: &MarketParams, eps: f64) -> Result<f64> {
    let r = limit_returns(params, eps)?;
    Ok(r.safe - r.risky_mean(params.up_probability))
}

/// Right-hand side `eps (1 - eps) (2 Phi(gap sqrt(cbar eps (1 - eps))) - 1)`.
pub fn avg_dynamics(params: &MarketParams, cbar: f64, eps: f64) -> Result<f64> {
    if !(cbar > 0.0) {
        return Err(invalid("cbar", "must be positive"));
    }
    check_fraction("eps", eps)?;
    let spread = eps * (1.0 - eps);
    if spread == 0.0 {
        return Ok(0.0);
    }
    let z = gap_of_average_returns(params, eps)? * (cbar * spread).sqrt();
    // 2 Phi(z) - 1 = erf(z / sqrt 2)
    Ok(spread * libm::erf(z / std::f64::consts::SQRT_2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AvgLimitCase {
    /// Mean risky rate above the borrowing rate: everyone ends risky.
    ToRisky,
    /// Safe agents earn more at every fraction: everyone ends safe.
    ToSafe,
    /// Borrowing rate above the mean risky rate: a unique balancing mix.
    Interior,
    /// None of the cases applies.
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgLimit {
    pub case: AvgLimitCase,
    pub limit: Option<f64>,
    /// `(r_b - mean risky rate) / (mean risky rate - r_s)`, the limit as the
    /// up probability tends to one; reported in the interior case.
    pub closed_form: Option<f64>,
    /// The sign pattern of the return gap contradicts the case (the up
    /// probability is too small for the classification to hold).
    pub inconsistent: bool,
}

/// Balancing fraction as the up probability tends to one.
pub fn balancing_fraction_limit(borrow_rate: f64, mean_risky_rate: f64, safe_rate: f64) -> f64 {
    (borrow_rate - mean_risky_rate) / (mean_risky_rate - safe_rate)
}

const GRID: usize = 999;

pub fn avg_limit(params: &MarketParams) -> Result<AvgLimit> {
    params.validate()?;
    let rr = params.mean_risky_rate();
    let (rb, rs) = (params.borrow_rate, params.safe_rate);
    let grid: Vec<f64> = (1..=GRID).map(|i| i as f64 / (GRID + 1) as f64).collect();
    let gaps: Vec<f64> = grid
        .iter()
        .map(|&e| gap_of_average_returns(params, e))
        .collect::<Result<_>>()?;
    let safe_everywhere = gaps.iter().all(|g| *g > 0.0);
    if rr > rb && rb > rs {
        return Ok(AvgLimit {
            case: AvgLimitCase::ToRisky,
            limit: Some(0.0),
            closed_form: None,
            inconsistent: gaps.iter().any(|g| *g > 0.0),
        });
    }
    if safe_everywhere {
        return Ok(AvgLimit {
            case: AvgLimitCase::ToSafe,
            limit: Some(1.0),
            closed_form: None,
            inconsistent: false,
        });
    }
    if rb > rr && rr > rs {
        let closed_form = Some(balancing_fraction_limit(rb, rr, rs));
        let changes: Vec<usize> = (1..gaps.len())
            .filter(|&i| (gaps[i - 1] > 0.0) != (gaps[i] > 0.0))
            .collect();
        let limit = changes.first().map(|&i| {
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            let positive_lo = gaps[i - 1] > 0.0;
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                let g = gap_of_average_returns(params, mid).expect("fraction in range");
                if (g > 0.0) == positive_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        });
        return Ok(AvgLimit {
            case: AvgLimitCase::Interior,
            limit,
            closed_form,
            inconsistent: changes.len() != 1 || gaps[0] <= 0.0,
        });
    }
    Ok(AvgLimit {
        case: AvgLimitCase::Unclassified,
        limit: None,
        closed_form: None,
        inconsistent: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;

    #[test]
    fn high_mean_rate_sends_everyone_risky() {
        let p = presets::table2_market(0.99);
        let l = avg_limit(&p).unwrap();
        assert_eq!(l.case, AvgLimitCase::ToRisky);
        assert_eq!(l.limit, Some(0.0));
    }

    #[test]
    fn closed_form_value() {
        assert!((balancing_fraction_limit(0.11, 0.108, 0.1) - 0.25).abs() < 1e-12);
    }

    fn interior_market() -> MarketParams {
        let mut p = presets::table2_market(0.945);
        p.senior_debt = 0.0;
        p
    }

    #[test]
    fn borrowing_rate_above_mean_rate_gives_interior_limit() {
        let l = avg_limit(&interior_market()).unwrap();
        assert_eq!(l.case, AvgLimitCase::Interior);
        let star = l.limit.unwrap();
        assert!(star > 0.0 && star < 1.0);
        assert!(l.closed_form.unwrap() > 0.0);
    }

    #[test]
    fn rhs_vanishes_at_balanced_returns() {
        let p = interior_market();
        let star = avg_limit(&p).unwrap().limit.unwrap();
        assert!(avg_dynamics(&p, 1e6, star).unwrap().abs() < 1e-6);
        assert_eq!(avg_dynamics(&p, 10.0, 0.0).unwrap(), 0.0);
        assert!(avg_dynamics(&p, 0.0, 0.5).is_err());
    }
}
