//! Configuration parsing and experiment dispatch for the `fnls` binary.

// Negated float comparisons such as `!(x > 0.0)` are used on purpose: they
// reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod runner;

pub use config::{parse_config, parse_config_str, ConfigError, Experiment, InitialSpec, RunConfig};
pub use runner::{describe, run, write_error_record, RunError, RunOutcome};
