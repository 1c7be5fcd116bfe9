//! Config-driven runner for the chemotaxis simulator: parses a JSON run
//! description, builds the initial datum and executes one scenario.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod initial;
pub mod scenarios;

pub use config::{load_config, parse_config, RunConfig, Scenario};
pub use error::{CliError, Result};
pub use scenarios::{execute, Execution, Outcome};
