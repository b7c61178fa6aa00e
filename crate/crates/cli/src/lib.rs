//! Experiment harness for jump martingales on embedded manifolds: the
//! verify subcommands, the data-facing subcommands, config parsing, run
//! manifests and deterministic CSV output.

// `!(x > 0)` guards reject NaN parameters, which `x <= 0` would accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod defaults;
pub mod experiments;
pub mod report;
pub mod runner;
