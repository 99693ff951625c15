//! Command-line front end: JSON configs, return-data estimation, and the
//! `solve`, `sweep`, `verify` and `simulate` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod estimate;
pub mod output;

pub use error::{CliError, CliResult};
