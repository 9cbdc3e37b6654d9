//! Command-line front end for the geometry core: scenario configs, per-run
//! CSV and JSON outputs, and the verification suite.

pub mod at;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use at::AtState;
pub use config::{Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
