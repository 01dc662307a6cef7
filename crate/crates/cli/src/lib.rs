//! The `foodscape` command-line pipeline.
//!
//! Every subcommand writes into `--out DIR` and echoes its effective settings
//! to `DIR/config.json`. Exit codes: 0 success, 1 the data cannot support the
//! requested analysis, 2 bad input.

mod config;
mod error;
mod pipeline;

pub use config::{Cli, Command, RunConfig};
pub use error::CliError;
pub use pipeline::run;
