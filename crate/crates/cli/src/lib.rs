//! Command-line harness: INI run configurations, sweep manifests, the
//! analyze/simulate/sweep/reproduce commands and their CSV, JSON and SVG
//! artifacts.

pub mod commands;
pub mod config;
pub mod embedded;
pub mod error;
pub mod manifest;
pub mod svg;

pub use config::{InitialCondition, RunConfig};
pub use error::{CliError, ConfigError};
pub use manifest::SweepManifest;
