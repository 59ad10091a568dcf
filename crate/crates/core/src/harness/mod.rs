//! Configuration, presets, output and table reproduction.

pub mod config;
pub mod output;
pub mod presets;
pub mod reproduce;

pub use config::{parse_seeds, ExperimentConfig};
pub use output::{emit_trajectory_csv, trajectory_csv, RunMetadata, TRAJECTORY_HEADER};
pub use reproduce::{reproduce_fig_trajectories, reproduce_table, TableReport, TableRow};
