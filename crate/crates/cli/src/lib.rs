//! File formats, reports, the benchmark harness and the `st2e` command line
//! on top of [`st2e_core`].

pub mod benchmark;
pub mod commands;
mod error;
pub mod ingest;
pub mod report;

pub use error::{CliError, CliResult};
