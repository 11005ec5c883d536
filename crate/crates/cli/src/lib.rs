//! Batch experiment runner for `qle-core`: TOML configs in, CSV tables and a
//! JSON metadata sidecar out.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ConfigFile, Experiment, ExperimentConfig, Overrides};
pub use error::{CliError, Result};
pub use run::{execute, run, RunOptions, RunOutput};
