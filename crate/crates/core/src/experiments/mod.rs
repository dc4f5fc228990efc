//! Configuration, parameter sweeps and CSV output.
//!
//! Each [`Study`] expands a configuration into independent parameter points,
//! evaluates them in parallel and returns rows in a fixed order, so the CSV
//! bytes depend only on the configuration and seed.

pub mod config;
pub mod csv;
mod studies;

pub use config::{ConfigError, ConfigResult, ExperimentConfig, GridOverride, GridSpec, Scale};
pub use csv::{CsvFile, CsvRow};
pub use studies::*;
