//! Reproduction of the preset tables and the trajectory figure.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::thresholds;
use crate::error::{Error, Result};
use crate::odeflow::{classify_attractors, FlowField, OdeState};
use crate::replicator::{estimate_limit, run_simulation, tail_default_fraction, SimConfig, Trajectory};

use super::output::{emit_trajectory_csv, flow_csv, write_file};
use super::presets::{self, RowSpec, Target};

/// Default distance allowed between the Monte Carlo mean and the target.
pub const MC_TOLERANCE: f64 = 0.05;

/// Worker count: `SYSRISK_THREADS` if set and positive, else rayon's choice.
pub fn worker_count() -> usize {
    std::env::var("SYSRISK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs `f` over `seeds` on a pool of [`worker_count`] threads; results keep
/// the order of `seeds`.
pub fn par_seeds<T: Send>(seeds: &[u64], f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| seeds.par_iter().map(|&s| f(s)).collect())
}

pub fn run_seeds(config: &SimConfig, seeds: &[u64]) -> Result<Vec<Trajectory>> {
    par_seeds(seeds, |s| run_simulation(config, s))
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub id: String,
    pub initial_fraction: f64,
    /// Limit of the flow from the initial fraction.
    pub theory_limit: Option<f64>,
    pub target: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub mc_per_seed: Vec<f64>,
    pub tail_default_fraction: f64,
    pub published_mc: f64,
    pub switch_point: f64,
    pub default_onset: f64,
    pub drift: f64,
    pub mean_departure_cap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub table: String,
    pub seeds: Vec<u64>,
    pub rows: Vec<TableRow>,
}

impl TableReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Plain-text summary, one line per row.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{:<12} {:>6} {:>8} {:>8} {:>16} {:>9} {:>6}\n",
            "row", "start", "theory", "target", "mc (stderr)", "published", "ok"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<12} {:>6.3} {:>8} {:>8.4} {:>8.4} ({:.4}) {:>9.4} {:>6}\n",
                r.id,
                r.initial_fraction,
                r.theory_limit.map_or("-".to_string(), |v| format!("{v:.4}")),
                r.target,
                r.mc_mean,
                r.mc_stderr,
                r.published_mc,
                if r.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn target_value(row: &RowSpec) -> Result<f64> {
    Ok(match row.target {
        Target::Pure(v) => v,
        Target::SwitchPoint => thresholds(&row.market)?.switch_point,
    })
}

/// Runs every row over `seeds`; `out` receives one CSV per (row, seed).
pub fn reproduce_rows(
    table: &str,
    rows: &[RowSpec],
    seeds: &[u64],
    tolerance: f64,
    out: Option<&Path>,
) -> Result<TableReport> {
    let mut report = TableReport { table: table.to_string(), seeds: seeds.to_vec(), rows: Vec::new() };
    for row in rows {
        let config = SimConfig::new(row.market, row.dynamics);
        let runs = run_seeds(&config, seeds)?;
        if let Some(dir) = out {
            for t in &runs {
                emit_trajectory_csv(t, &dir.join(format!("{}_seed{}.csv", row.id, t.seed)))?;
            }
        }
        let finals: Vec<f64> = runs.iter().map(|t| estimate_limit(t, None)).collect();
        let defaults: Vec<f64> = runs.iter().map(|t| tail_default_fraction(t, None)).collect();
        let (mc_mean, mc_stderr) = mean_and_stderr(&finals);
        let th = thresholds(&row.market)?;
        let attractors = classify_attractors(&row.market, &row.dynamics)?;
        let target = target_value(row)?;
        report.rows.push(TableRow {
            id: row.id.to_string(),
            initial_fraction: row.dynamics.initial_fraction,
            theory_limit: attractors.limit_from(row.dynamics.initial_fraction).map(|a| a.eps),
            target,
            mc_mean,
            mc_stderr,
            mc_per_seed: finals,
            tail_default_fraction: mean_and_stderr(&defaults).0,
            published_mc: row.published_mc,
            switch_point: th.switch_point,
            default_onset: th.default_onset,
            drift: row.dynamics.drift(),
            mean_departure_cap: row.dynamics.effective_departures(),
            tolerance,
            pass: (mc_mean - target).abs() <= tolerance,
        });
    }
    Ok(report)
}

pub fn reproduce_table(name: &str, seeds: &[u64], out: Option<&Path>) -> Result<TableReport> {
    let rows = match name {
        "table2" => presets::table2_rows(),
        "table3" => presets::table3_rows(true),
        "table4" => presets::table4_rows(true),
        "table3-stay" => presets::table3_rows(false),
        "table4-stay" => presets::table4_rows(false),
        other => return Err(Error::Config(format!("unknown table `{other}`"))),
    };
    reproduce_rows(name, &rows, seeds, MC_TOLERANCE, out)
}

/// Flow time after `k` rounds from an initial population `n0`.
pub fn clock_at_round(initial_population: u64, k: u64) -> f64 {
    let n0 = initial_population as f64;
    (1..=k).map(|j| 1.0 / (n0 + j as f64)).sum()
}

/// Flow overlay sampled at every round of `trajectory`, restarted from the
/// simulated state at round `restart` (if inside the run).
pub fn flow_overlay(config: &SimConfig, trajectory: &Trajectory, restart: Option<u64>) -> Result<Vec<OdeState>> {
    let flow = FlowField::new(&config.market, &config.dynamics)?;
    let n0 = config.dynamics.initial_population;
    let first = trajectory.records.first().ok_or_else(|| Error::Config("empty trajectory".into()))?;
    let mut state = OdeState { t: 0.0, eps: first.eps, psi: first.psi };
    let mut out = Vec::with_capacity(trajectory.records.len());
    let mut t = 0.0;
    for r in &trajectory.records {
        if r.round > 0 {
            t += 1.0 / (n0 + r.round) as f64;
        }
        if Some(r.round) == restart {
            state = OdeState { t, eps: r.eps, psi: r.psi };
        }
        state = flow.advance(state, t)?;
        state.t = t;
        out.push(state);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureCurve {
    pub initial_fraction: f64,
    pub seed: u64,
    pub mc_file: PathBuf,
    pub flow_file: PathBuf,
    pub mc_final: f64,
    pub flow_final: f64,
    pub mean_abs_gap: f64,
}

/// Paired simulated and flow trajectories of the figure preset.
pub fn reproduce_fig_trajectories(seed: u64, out: &Path) -> Result<Vec<FigureCurve>> {
    let market = presets::tables34_market();
    let starts = presets::FIG_TRAJECTORY_STARTS;
    par_seeds(&starts.iter().map(|s| s.to_bits()).collect::<Vec<_>>(), |bits| {
        let eps0 = f64::from_bits(bits);
        let config = SimConfig::new(market, presets::fig_trajectory_dynamics(eps0));
        let traj = run_simulation(&config, seed)?;
        let overlay = flow_overlay(&config, &traj, Some(presets::FIG_TRAJECTORY_RESTART))?;
        let tag = format!("{:.0}", eps0 * 100.0);
        let mc_file = out.join(format!("fig_mc_start{tag}.csv"));
        let flow_file = out.join(format!("fig_flow_start{tag}.csv"));
        emit_trajectory_csv(&traj, &mc_file)?;
        write_file(&flow_file, flow_csv(&overlay)?.as_bytes())?;
        let gap = traj
            .records
            .iter()
            .zip(&overlay)
            .map(|(r, o)| (r.eps - o.eps).abs())
            .sum::<f64>()
            / overlay.len() as f64;
        Ok(FigureCurve {
            initial_fraction: eps0,
            seed,
            mc_file,
            flow_file,
            mc_final: traj.final_eps(),
            flow_final: overlay.last().map_or(eps0, |s| s.eps),
            mean_abs_gap: gap,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_and_stderr(&[0.5, 0.5, 0.5]), (0.5, 0.0));
        let (m, s) = mean_and_stderr(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clock_matches_sum() {
        assert_eq!(clock_at_round(300, 0), 0.0);
        assert!((clock_at_round(300, 2) - (1.0 / 301.0 + 1.0 / 302.0)).abs() < 1e-15);
    }

    #[test]
    fn theory_column_of_departure_tables() {
        let m = presets::tables34_market();
        let expect = [1.0, 1.0, thresholds(&m).unwrap().switch_point];
        for (row, e) in presets::table4_rows(true).iter().zip(expect) {
            let a = classify_attractors(&row.market, &row.dynamics).unwrap();
            assert_eq!(a.limit_from(row.dynamics.initial_fraction).unwrap().eps, e, "{}", row.id);
        }
        for (row, e) in presets::table3_rows(true).iter().zip([1.0, 0.0]) {
            let a = classify_attractors(&row.market, &row.dynamics).unwrap();
            assert_eq!(a.limit_from(row.dynamics.initial_fraction).unwrap().eps, e, "{}", row.id);
        }
    }

    #[test]
    fn unknown_table_is_rejected() {
        assert!(reproduce_table("table9", &[0], None).is_err());
    }

    #[test]
    fn short_rows_run() {
        let mut row = presets::table2_rows()[0];
        row.dynamics.rounds = 20;
        let r = reproduce_rows("t", &[row], &[0, 1], MC_TOLERANCE, None).unwrap();
        assert_eq!(r.rows[0].mc_per_seed.len(), 2);
        assert!(r.summary().contains(row.id));
    }
}
