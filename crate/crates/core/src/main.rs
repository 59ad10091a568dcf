use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sysrisk::analytic::{clearing_limit, limit_returns, safe_win_probability, thresholds};
use sysrisk::ess::{check_avg_ess, check_mixed_ess, check_multi_mutation, default_profiles, EssGrids, EssVerdict, UtilityKind};
use sysrisk::harness::output::{write_file, write_json};
use sysrisk::harness::reproduce::{reproduce_fig_trajectories, reproduce_table, run_seeds};
use sysrisk::harness::{emit_trajectory_csv, parse_seeds, presets, ExperimentConfig, RunMetadata};
use sysrisk::odeflow::{classify_attractors, gap_of_average_returns, ode_numeric, FlowField, OdeState};
use sysrisk::replicator::{estimate_limit, tail_default_fraction};
use sysrisk::{Error, Result};

#[derive(Parser)]
#[command(name = "sysrisk", version, about = "Clearing, flow limits and replicator simulation for random liability networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Limit clearing values, returns and thresholds over a fraction grid.
    Analytic {
        #[command(flatten)]
        common: Common,
        /// Number of interior grid points.
        #[arg(long, default_value_t = 99)]
        points: usize,
    },
    /// Exact and numerically integrated flow trajectories.
    Ode {
        #[command(flatten)]
        common: Common,
        /// Starting fraction (defaults to the configured one).
        #[arg(long)]
        eps0: Option<f64>,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Monte Carlo runs, one CSV per seed.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Stability verdicts for the pure limits and the switch point.
    Ess {
        #[command(flatten)]
        common: Common,
    },
    /// Rerun a preset table or the trajectory figure.
    Reproduce {
        /// table2, table3, table4, table3-stay, table4-stay or fig-trajectories
        target: String,
        #[command(flatten)]
        common: Common,
        /// Exit non-zero if any row misses its tolerance.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `section.key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset row id (e.g. t2-r1, t4-r3-stay) used when no config is given.
    #[arg(long, default_value = "t2-r1")]
    preset: String,
    /// Seeds: `3`, `1,2,5` or `0..20`.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    fixed_links: bool,
    /// Turn defaulter departures on (the configured cap must be positive).
    #[arg(long)]
    departures: bool,
    #[arg(long)]
    deterministic_counts: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let row = presets::find_row(&self.preset)
                    .ok_or_else(|| Error::Config(format!("unknown preset `{}`", self.preset)))?;
                ExperimentConfig::from_row(&row)
            }
        };
        if let Some(s) = &self.seed {
            cfg.seeds = parse_seeds(s)?;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        let opts = &mut cfg.sim.options;
        opts.fixed_links |= self.fixed_links;
        opts.deterministic_counts |= self.deterministic_counts;
        cfg.sim.dynamics.departures |= self.departures;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("sysrisk-out"))
}

fn write_metadata(command: &str, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    write_json(&dir.join("metadata.json"), &RunMetadata::new(command, cfg))
}

fn analytic(cfg: &ExperimentConfig, points: usize) -> Result<()> {
    let m = &cfg.sim.market;
    let th = thresholds(m)?;
    let mut s = format!(
        "# default_onset={}\n# switch_point={}\n# switch_point_scan={}\n# systemic_onset={}\n# outside_theory={}\n",
        th.default_onset, th.switch_point, th.switch_point_scan, th.systemic_onset, th.outside_theory
    );
    s.push_str("eps,x_bar,p_d,regime,r_safe,r_risky_up,r_risky_down,safe_win_probability,average_gap\n");
    for i in 1..=points {
        let eps = i as f64 / (points + 1) as f64;
        let cl = clearing_limit(m, eps)?;
        let r = limit_returns(m, eps)?;
        s.push_str(&format!(
            "{},{},{},{:?},{},{},{},{},{}\n",
            eps,
            cl.x_bar,
            cl.p_d,
            cl.regime,
            r.safe,
            r.risky_up,
            r.risky_down,
            safe_win_probability(m, eps)?,
            gap_of_average_returns(m, eps)?
        ));
    }
    let dir = out_dir(cfg);
    write_file(&dir.join("analytic.csv"), s.as_bytes())?;
    write_metadata("analytic", cfg, &dir)?;
    println!(
        "default_onset {:.6}  switch_point {:.6}  systemic_onset {:.6}",
        th.default_onset, th.switch_point, th.systemic_onset
    );
    println!("wrote {}", dir.join("analytic.csv").display());
    Ok(())
}

fn ode(cfg: &ExperimentConfig, eps0: Option<f64>, horizon: f64, step: f64) -> Result<()> {
    let (m, d) = (&cfg.sim.market, &cfg.sim.dynamics);
    let eps0 = eps0.unwrap_or(d.initial_fraction);
    let flow = FlowField::new(m, d)?;
    let numeric = ode_numeric(m, d, eps0, 1.0, horizon, step)?;
    let times: Vec<f64> = numeric.iter().map(|s| s.t).collect();
    let exact = flow.trajectory(OdeState { t: 0.0, eps: eps0, psi: 1.0 }, &times)?;
    let mut s = String::from("t,eps,psi,eps_numeric,psi_numeric\n");
    for (e, n) in exact.iter().zip(&numeric) {
        s.push_str(&format!("{},{},{},{},{}\n", e.t, e.eps, e.psi, n.eps, n.psi));
    }
    let dir = out_dir(cfg);
    write_file(&dir.join("ode.csv"), s.as_bytes())?;
    write_json(&dir.join("attractors.json"), &classify_attractors(m, d)?)?;
    write_metadata("ode", cfg, &dir)?;
    let last = exact.last().copied().unwrap_or(OdeState { t: 0.0, eps: eps0, psi: 1.0 });
    println!("eps({}) = {:.6}  psi = {:.6}", last.t, last.eps, last.psi);
    println!("wrote {}", dir.join("ode.csv").display());
    Ok(())
}

#[derive(Serialize)]
struct SeedSummary {
    seed: u64,
    final_eps: f64,
    tail_eps: f64,
    tail_default_fraction: f64,
    unconverged_rounds: usize,
}

fn simulate(cfg: &ExperimentConfig) -> Result<()> {
    let dir = out_dir(cfg);
    let runs = run_seeds(&cfg.sim, &cfg.seeds)?;
    let mut summary = Vec::new();
    for t in &runs {
        emit_trajectory_csv(t, &dir.join(format!("trajectory_seed{}.csv", t.seed)))?;
        let s = SeedSummary {
            seed: t.seed,
            final_eps: t.final_eps(),
            tail_eps: estimate_limit(t, cfg.tail_window),
            tail_default_fraction: tail_default_fraction(t, cfg.tail_window),
            unconverged_rounds: t.records.iter().filter(|r| !r.converged).count(),
        };
        println!(
            "seed {:>4}  final {:.4}  tail {:.4}  defaults {:.4}",
            s.seed, s.final_eps, s.tail_eps, s.tail_default_fraction
        );
        summary.push(s);
    }
    write_json(&dir.join("summary.json"), &summary)?;
    write_metadata("simulate", cfg, &dir)
}

fn ess(cfg: &ExperimentConfig) -> Result<()> {
    let (m, d) = (&cfg.sim.market, &cfg.sim.dynamics);
    let th = thresholds(m)?;
    let grids = EssGrids::default();
    let mut candidates = vec![0.0, 1.0];
    if th.switch_point > 0.0 && th.switch_point < 1.0 {
        candidates.push(th.switch_point);
    }
    let mut verdicts: Vec<EssVerdict> = Vec::new();
    for &c in &candidates {
        verdicts.push(check_mixed_ess(m, d, c, &grids)?);
        verdicts.push(check_multi_mutation(m, d, c, &default_profiles(c), UtilityKind::Switch)?);
        verdicts.push(check_avg_ess(m, c, 1.0, &grids)?);
    }
    for v in &verdicts {
        println!(
            "{:<18} candidate {:.6}  ess {:<5}  margin {:.3e}{}",
            format!("{:?}", v.mode),
            v.candidate,
            v.is_ess,
            v.margin,
            if v.flagged { "  (flagged)" } else { "" }
        );
    }
    let dir = out_dir(cfg);
    write_json(&dir.join("ess.json"), &verdicts)?;
    write_metadata("ess", cfg, &dir)
}

fn reproduce(target: &str, cfg: &ExperimentConfig, strict: bool) -> Result<bool> {
    let dir = out_dir(cfg);
    if target == "fig-trajectories" {
        let seed = cfg.seeds[0];
        let curves = reproduce_fig_trajectories(seed, &dir)?;
        for c in &curves {
            println!(
                "start {:.2}  mc final {:.4}  flow final {:.4}  mean |gap| {:.4}",
                c.initial_fraction, c.mc_final, c.flow_final, c.mean_abs_gap
            );
        }
        write_json(&dir.join("fig_trajectories.json"), &curves)?;
        write_metadata("reproduce fig-trajectories", cfg, &dir)?;
        return Ok(true);
    }
    let report = reproduce_table(target, &cfg.seeds, Some(&dir))?;
    print!("{}", report.summary());
    write_json(&dir.join(format!("{target}_report.json")), &report)?;
    write_metadata(&format!("reproduce {target}"), cfg, &dir)?;
    Ok(!strict || report.all_pass())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analytic { common, points } => analytic(&common.config()?, points).map(|_| true),
        Command::Ode { common, eps0, horizon, step } => {
            ode(&common.config()?, eps0, horizon, step).map(|_| true)
        }
        Command::Simulate { common } => simulate(&common.config()?).map(|_| true),
        Command::Ess { common } => ess(&common.config()?).map(|_| true),
        Command::Reproduce { target, common, strict } => reproduce(&target, &common.config()?, strict),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("reproduction tolerance missed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
