//! Config parsing, dispatch and reporting for the `gausdet` binary.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, Command, Format, Overrides, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{parse_csv, Output, Report};
pub use run::run_command;
