//! CSV and JSON emission.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::odeflow::OdeState;
use crate::replicator::Trajectory;

use super::config::ExperimentConfig;

pub const TRAJECTORY_HEADER: &str =
    "round,n,n1,eps,psi,default_frac,xi,Xi1,Xi2,departures,mean_r1,mean_r2,seed";

/// Trajectory as CSV text (header plus one row per round).
pub fn trajectory_csv(trajectory: &Trajectory) -> Result<String> {
    if trajectory.records.is_empty() {
        return Err(invalid("trajectory", "has no rounds"));
    }
    let mut s = String::with_capacity(96 * (trajectory.records.len() + 1));
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for r in &trajectory.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.round,
            r.n,
            r.n1,
            r.eps,
            r.psi,
            r.default_frac,
            r.xi,
            r.to_safe,
            r.to_risky,
            r.departures,
            r.mean_r1,
            r.mean_r2,
            r.seed
        );
    }
    Ok(s)
}

pub fn emit_trajectory_csv(trajectory: &Trajectory, path: &Path) -> Result<()> {
    write_file(path, trajectory_csv(trajectory)?.as_bytes())
}

/// Flow states in the trajectory schema; one row per round, counts blank.
pub fn flow_csv(states: &[OdeState]) -> Result<String> {
    if states.is_empty() {
        return Err(invalid("states", "is empty"));
    }
    let mut s = String::with_capacity(48 * (states.len() + 1));
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for st in states {
        let _ = writeln!(s, ",,,{},{},,,,,,,,", st.eps, st.psi);
    }
    Ok(s)
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Provenance written next to every set of outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub config_hash: String,
    pub seeds: &'a [u64],
    pub config: &'a ExperimentConfig,
}

impl<'a> RunMetadata<'a> {
    pub fn new(command: &'a str, config: &'a ExperimentConfig) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_hash: config.hash(),
            seeds: &config.seeds,
            config,
        }
    }
}
