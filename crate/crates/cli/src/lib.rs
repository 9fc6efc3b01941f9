//! Scenario runner for the gamowlab experiments.
//!
//! Each scenario builds an initial state, evolves it and writes CSV data
//! plus a `manifest.json` that lists every emitted file and the invariants
//! checked along the way. The manifest is written last, so its presence
//! marks a completed run.

pub mod catalog;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{parse_config, Diagnostic, ScenarioConfig};
pub use error::CliError;
pub use output::RunManifest;
pub use runner::{run_scenario, RunOverrides};
