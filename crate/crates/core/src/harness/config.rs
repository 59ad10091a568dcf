//! Experiment configuration as flat `section.key = value` text.
//!
//! The text is parsed as TOML, so dotted keys and `[section]` tables are both
//! accepted. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clearing::ClearingOptions;
use crate::error::{Error, Result};
use crate::model::{default_bound, DynamicsParams, MarketParams};
use crate::netgen::PeerWeighting;
use crate::replicator::{SimConfig, SimOptions};

use super::presets::RowSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarketSection {
    wealth: f64,
    senior_debt: f64,
    interbank_fraction: f64,
    up_probability: f64,
    up_rate: f64,
    down_rate: f64,
    safe_rate: f64,
    borrow_rate: f64,
    #[serde(default = "one")]
    link_probability: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DynamicsSection {
    mean_arrivals: f64,
    #[serde(default)]
    arrival_bound: Option<u64>,
    mean_switch_attempts: f64,
    #[serde(default)]
    switch_attempt_bound: Option<u64>,
    #[serde(default)]
    mean_departure_cap: f64,
    #[serde(default)]
    departure_cap_bound: Option<u64>,
    arrival_accuracy: f64,
    switch_accuracy: f64,
    initial_population: u64,
    initial_fraction: f64,
    rounds: u64,
    /// Defaults to "on" whenever the departure cap is positive.
    #[serde(default)]
    departures: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OptionsSection {
    weighting: PeerWeighting,
    fixed_links: bool,
    deterministic_counts: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunSection {
    seeds: Vec<u64>,
    out: Option<PathBuf>,
    tail_window: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    market: MarketSection,
    dynamics: DynamicsSection,
    #[serde(default)]
    options: OptionsSection,
    #[serde(default)]
    clearing: Option<ClearingSection>,
    #[serde(default)]
    run: RunSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClearingSection {
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    window: Option<usize>,
    #[serde(default)]
    relaxation: Option<f64>,
}

/// A validated experiment: parameters, switches, seeds and output place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub tail_window: Option<usize>,
}

/// Seeds used when a config lists none.
pub const DEFAULT_SEEDS: std::ops::Range<u64> = 0..20;

impl ExperimentConfig {
    pub fn new(market: MarketParams, dynamics: DynamicsParams) -> Self {
        Self {
            sim: SimConfig::new(market, dynamics),
            seeds: DEFAULT_SEEDS.collect(),
            out: None,
            tail_window: None,
        }
    }

    pub fn from_row(row: &RowSpec) -> Self {
        Self::new(row.market, row.dynamics)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let m = file.market;
        let market = MarketParams {
            wealth: m.wealth,
            senior_debt: m.senior_debt,
            interbank_fraction: m.interbank_fraction,
            up_probability: m.up_probability,
            up_rate: m.up_rate,
            down_rate: m.down_rate,
            safe_rate: m.safe_rate,
            borrow_rate: m.borrow_rate,
            link_probability: m.link_probability,
        };
        let d = file.dynamics;
        let dynamics = DynamicsParams {
            mean_arrivals: d.mean_arrivals,
            arrival_bound: d.arrival_bound.unwrap_or(default_bound(d.mean_arrivals)),
            mean_switch_attempts: d.mean_switch_attempts,
            switch_attempt_bound: d
                .switch_attempt_bound
                .unwrap_or(default_bound(d.mean_switch_attempts)),
            mean_departure_cap: d.mean_departure_cap,
            departure_cap_bound: d
                .departure_cap_bound
                .unwrap_or(default_bound(d.mean_departure_cap)),
            arrival_accuracy: d.arrival_accuracy,
            switch_accuracy: d.switch_accuracy,
            initial_population: d.initial_population,
            initial_fraction: d.initial_fraction,
            rounds: d.rounds,
            departures: d.departures.unwrap_or(d.mean_departure_cap > 0.0),
        };
        let mut clearing = ClearingOptions::default();
        if let Some(c) = file.clearing {
            clearing.tol = c.tol.unwrap_or(clearing.tol);
            clearing.max_iter = c.max_iter.unwrap_or(clearing.max_iter);
            clearing.window = c.window.unwrap_or(clearing.window);
            clearing.relaxation = c.relaxation.unwrap_or(clearing.relaxation);
        }
        let options = SimOptions {
            weighting: file.options.weighting,
            clearing,
            fixed_links: file.options.fixed_links,
            deterministic_counts: file.options.deterministic_counts,
        };
        let cfg = Self {
            sim: SimConfig { market, dynamics, options },
            seeds: if file.run.seeds.is_empty() {
                DEFAULT_SEEDS.collect()
            } else {
                file.run.seeds
            },
            out: file.run.out,
            tail_window: file.run.tail_window,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if let Some(w) = self.tail_window {
            if w == 0 || w as u64 > self.sim.dynamics.rounds {
                return Err(Error::Config("tail_window must lie in [1, rounds]".into()));
            }
        }
        Ok(())
    }

    /// Canonical flat text, one `section.key = value` line per field.
    pub fn to_text(&self) -> String {
        let m = &self.sim.market;
        let d = &self.sim.dynamics;
        let o = &self.sim.options;
        let mut lines = vec![
            format!("market.wealth = {:?}", m.wealth),
            format!("market.senior_debt = {:?}", m.senior_debt),
            format!("market.interbank_fraction = {:?}", m.interbank_fraction),
            format!("market.up_probability = {:?}", m.up_probability),
            format!("market.up_rate = {:?}", m.up_rate),
            format!("market.down_rate = {:?}", m.down_rate),
            format!("market.safe_rate = {:?}", m.safe_rate),
            format!("market.borrow_rate = {:?}", m.borrow_rate),
            format!("market.link_probability = {:?}", m.link_probability),
            format!("dynamics.mean_arrivals = {:?}", d.mean_arrivals),
            format!("dynamics.arrival_bound = {}", d.arrival_bound),
            format!("dynamics.mean_switch_attempts = {:?}", d.mean_switch_attempts),
            format!("dynamics.switch_attempt_bound = {}", d.switch_attempt_bound),
            format!("dynamics.mean_departure_cap = {:?}", d.mean_departure_cap),
            format!("dynamics.departure_cap_bound = {}", d.departure_cap_bound),
            format!("dynamics.arrival_accuracy = {:?}", d.arrival_accuracy),
            format!("dynamics.switch_accuracy = {:?}", d.switch_accuracy),
            format!("dynamics.initial_population = {}", d.initial_population),
            format!("dynamics.initial_fraction = {:?}", d.initial_fraction),
            format!("dynamics.rounds = {}", d.rounds),
            format!("dynamics.departures = {}", d.departures),
            format!(
                "options.weighting = \"{}\"",
                match o.weighting {
                    PeerWeighting::SelfExcluded => "SelfExcluded",
                    PeerWeighting::Literal => "Literal",
                }
            ),
            format!("options.fixed_links = {}", o.fixed_links),
            format!("options.deterministic_counts = {}", o.deterministic_counts),
            format!("clearing.tol = {:?}", o.clearing.tol),
            format!("clearing.max_iter = {}", o.clearing.max_iter),
            format!("clearing.window = {}", o.clearing.window),
            format!("clearing.relaxation = {:?}", o.clearing.relaxation),
            format!(
                "run.seeds = [{}]",
                self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
            ),
        ];
        if let Some(out) = &self.out {
            lines.push(format!("run.out = {:?}", out.display().to_string()));
        }
        if let Some(w) = self.tail_window {
            lines.push(format!("run.tail_window = {w}"));
        }
        lines.join("\n") + "\n"
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `"3"`, `"1,2,5"` or `"0..20"` into a seed list.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("bad seed list `{spec}`"));
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a >= b {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}
