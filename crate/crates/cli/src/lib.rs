//! Config-driven runner for trotterlab experiments.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, parse_str, ExperimentConfig};
pub use error::CliError;
pub use run::{run, write_outputs, RunManifest, RunOutput};
