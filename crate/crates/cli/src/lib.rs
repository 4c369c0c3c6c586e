//! Library side of the `sos` command-line tool.

pub mod commands;
pub mod config;
pub mod error;

pub use error::{CliError, CliResult};
