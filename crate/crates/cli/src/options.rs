//! Command options as given on the command line or in a JSON config file.
//!
//! Config files use the flag names as keys (`{"burn-in": 1000}`); flags
//! override file values. A run manifest is also accepted as a config file,
//! in which case its recorded `config` object is used.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use eglf_core::simulators::Problem;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, Context, Result};

/// Fills unset fields from a lower-priority source.
pub trait Merge {
    fn or(self, base: Self) -> Self;
}

macro_rules! options {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $(
                $(#[$fmeta])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl Merge for $name {
            fn or(self, base: Self) -> Self {
                Self { $($field: self.$field.or(base.$field),)* }
            }
        }
    };
}

options! {
    GenDataOpts {
        /// Benchmark problem: circle, linear or toy.
        #[arg(long)]
        problem: Problem,
        /// Number of (theta, eps) records [default: 1000000, desk: 50000].
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Dataset CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// JSON array holding x_o; by default x_o is simulated from the problem's theta*.
        #[arg(long)]
        xo: PathBuf,
        /// Seed for simulating x_o [default: 0].
        #[arg(long)]
        xo_seed: u64,
        /// Use desk-scale defaults.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        desk: bool,
    }
}

options! {
    TrainOpts {
        /// Dataset CSV.
        #[arg(long)]
        data: PathBuf,
        /// Defaults to the problem recorded in the dataset's manifest.
        #[arg(long)]
        problem: Problem,
        /// Checkpoint JSON to write.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        batch_size: usize,
        #[arg(long)]
        max_epochs: usize,
        #[arg(long)]
        patience: usize,
        #[arg(long)]
        validation_fraction: f64,
        #[arg(long)]
        learning_rate: f64,
        /// Hidden layer widths, comma separated.
        #[arg(long, value_delimiter = ',')]
        hidden: Vec<usize>,
        #[arg(long)]
        seed: u64,
    }
}

options! {
    SampleOpts {
        /// Classifier checkpoint.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Chain CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// `min` for the smallest training error, or a raw error value.
        #[arg(long, allow_hyphen_values = true)]
        eps: EpsMode,
        /// Retained states per chain [default: 1000000, desk: 100000].
        #[arg(long)]
        n: usize,
        /// [default: 10000, desk: 1000]
        #[arg(long)]
        burn_in: usize,
        /// Initial state [default: prior midpoint].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta0: Vec<f64>,
        /// Proposal standard deviations [default: 0.05 of each prior width].
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<f64>,
        /// Number of independent chains [default: 1].
        #[arg(long)]
        chains: usize,
        #[arg(long)]
        seed: u64,
        /// Use desk-scale defaults.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        desk: bool,
    }
}

options! {
    AbcOpts {
        #[arg(long)]
        problem: Problem,
        /// Accepted-sample CSV to write.
        #[arg(long)]
        out: PathBuf,
        /// Acceptance threshold on the L1 error [default: per problem].
        #[arg(long, allow_hyphen_values = true)]
        threshold: f64,
        /// Acceptances to collect [default: 1000000, desk: 10000].
        #[arg(long)]
        target: usize,
        /// Maximum simulations [default: 1000000000, desk: 100000000].
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        xo: PathBuf,
        #[arg(long)]
        xo_seed: u64,
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        desk: bool,
    }
}

options! {
    CheckEpsOpts {
        /// Chain CSV whose states are resimulated.
        #[arg(long)]
        chain: PathBuf,
        /// Defaults to the problem recorded in the checkpoint.
        #[arg(long)]
        problem: Problem,
        #[arg(long)]
        checkpoint: PathBuf,
        /// [default: 10000]
        #[arg(long)]
        n_draws: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        xo: PathBuf,
        #[arg(long)]
        xo_seed: u64,
        /// Manifest to write [default: next to the chain].
        #[arg(long)]
        out: PathBuf,
    }
}

options! {
    ReportOpts {
        /// Chain or dataset CSV files.
        #[arg(long, value_delimiter = ',')]
        input: Vec<PathBuf>,
        /// Directory for histograms and summaries.
        #[arg(long)]
        out_dir: PathBuf,
        /// Histogram bins [default: 64].
        #[arg(long)]
        bins: usize,
    }
}

/// Conditioning error for the sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsMode {
    /// The smallest error seen in training (scaled 0).
    Min,
    Raw(f64),
}

impl FromStr for EpsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "min" {
            return Ok(EpsMode::Min);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(EpsMode::Raw(v)),
            _ => Err(format!("expected `min` or a finite number, got `{s}`")),
        }
    }
}

impl fmt::Display for EpsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsMode::Min => f.write_str("min"),
            EpsMode::Raw(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for EpsMode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EpsMode::Min => s.serialize_str("min"),
            EpsMode::Raw(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for EpsMode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(EpsMode::Raw(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Reads a config file for `command`, accepting either an options object or
/// a manifest written by the same command.
pub fn load_config<T: DeserializeOwned>(path: &Path, command: &str) -> Result<T> {
    let text = fs::read_to_string(path).in_file(path)?;
    let mut value: serde_json::Value = serde_json::from_str(&text).in_file(path)?;
    if let Some(recorded) = value.get("command").and_then(|c| c.as_str()) {
        if value.get("config").is_some() {
            if recorded != command {
                return Err(CliError::Config(format!(
                    "{}: manifest was written by `{recorded}`, not `{command}`",
                    path.display()
                )));
            }
            value = value["config"].take();
        }
    }
    serde_json::from_value(value).in_file(path)
}

/// Flags over the config file.
pub fn merge<T: DeserializeOwned + Merge>(flags: T, config: Option<&Path>, command: &str) -> Result<T> {
    match config {
        Some(path) => Ok(flags.or(load_config(path, command)?)),
        None => Ok(flags),
    }
}

pub(crate) fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Config(format!("missing required option `{key}`")))
}
