//! Batch driver for the Brinkman-Forchheimer slip-wall solver:
//! config parsing, the run/steady/verify/sweep subcommands, and
//! deterministic CSV/SVG emission.

pub mod commands;
pub mod config;
pub mod csvout;
pub mod suite;
pub mod svg;

pub use config::{parse_config, CliError, RunConfig};
