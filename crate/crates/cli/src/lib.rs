//! Library surface of the `sedres` batch CLI: configuration parsing,
//! experiment orchestration and the aggregated verification report.

pub mod commands;
pub mod config;
pub mod verify;

pub use config::{ConfigError, RunConfig};
