//! IO companion to `radner-core`: Monte Carlo path simulation and
//! verification, configuration loading, JSON/CSV artifacts, and the
//! `radner` command-line tool.

pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod sim;
pub mod verify;

pub use cli::run;
pub use error::CliError;
