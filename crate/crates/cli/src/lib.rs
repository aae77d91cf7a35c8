//! Scenario files, the `abstract` / `simulate` / `verify` pipeline, and
//! CSV and SVG output.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_abstract, cmd_simulate, cmd_verify, CliError};
pub use config::{Scenario, ScenarioConfig};
