//! Command-line front end: configuration, subcommands and SVG rendering.

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod render;

pub use commands::{run, Command, Context, Outcome};
pub use config::RunConfig;
pub use error::CliError;
