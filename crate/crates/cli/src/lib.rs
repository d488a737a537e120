//! Command-line driver: configuration resolution and subcommand dispatch.

pub mod config;
pub mod run;
