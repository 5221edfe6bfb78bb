//! Command-line driver and file formats for the corridor network optimizer.
//!
//! The library half of the binary: scenario files, result export, CDF
//! computation, and the subcommand implementations, kept separate from the
//! argument parsing so they are directly testable.

pub mod commands;
pub mod error;
pub mod export;
pub mod report;
pub mod scenario_file;

pub use error::CliError;
