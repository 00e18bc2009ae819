//! Command-line front end: configuration, result files and the sweep,
//! oracle, compare and validate commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use output::{ResultFile, Row};
