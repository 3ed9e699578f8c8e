//! Command-line driver: dataset generation, training, sampling, the ABC
//! baseline, the error re-simulation check and reports.
//!
//! Every command writes its artifacts plus a JSON run manifest recording the
//! fully resolved options, so a run can be replayed with `--config <manifest>`.

pub mod commands;
mod error;
pub mod manifest;
pub mod options;
pub mod report;

pub use error::{CliError, Result};
