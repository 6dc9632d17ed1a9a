//! Command-line driver: configuration, experiment pipelines and output files.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod run;

pub use config::{parse_config_text, Experiment, RunConfig};
pub use error::{CliError, Result};
pub use run::run;
