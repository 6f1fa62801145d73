//! Experiment runner behind the `tnfuse` binary.

pub mod campaign;
pub mod config;
pub mod error;
pub mod report;

pub use config::ExperimentConfig;
pub use error::CliError;
