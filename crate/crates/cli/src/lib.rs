//! Scenario runner for the `ontic-sim` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_with, ConfigError, Format, Overrides, Scenario, ScenarioConfig};
pub use run::{apply_tolerance_scale, render, run, Outcome, RunError};
