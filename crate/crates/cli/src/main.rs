use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eglf_cli::manifest::RunManifest;
use eglf_cli::options::{merge, AbcOpts, CheckEpsOpts, GenDataOpts, ReportOpts, SampleOpts, TrainOpts};
use eglf_cli::{commands, Result};

/// Error-guided likelihood-free MCMC.
#[derive(Parser)]
#[command(name = "eglf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct With<T: Args> {
    /// JSON config file or run manifest; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    opts: T,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a training dataset and the reference observation.
    GenData(With<GenDataOpts>),
    /// Train the ratio classifier on a dataset.
    Train(With<TrainOpts>),
    /// Sample the posterior conditioned on an error value.
    Sample(With<SampleOpts>),
    /// Rejection ABC baseline.
    Abc(With<AbcOpts>),
    /// Resimulate chain states and report the error distribution.
    CheckEps(With<CheckEpsOpts>),
    /// Histograms and summary tables for chain or dataset files.
    Report(With<ReportOpts>),
}

fn run(command: Command) -> Result<RunManifest> {
    match command {
        Command::GenData(w) => commands::gen_data(merge(w.opts, w.config.as_deref(), "gen-data")?),
        Command::Train(w) => commands::train(merge(w.opts, w.config.as_deref(), "train")?),
        Command::Sample(w) => commands::sample(merge(w.opts, w.config.as_deref(), "sample")?),
        Command::Abc(w) => commands::abc(merge(w.opts, w.config.as_deref(), "abc")?),
        Command::CheckEps(w) => commands::check_eps(merge(w.opts, w.config.as_deref(), "check-eps")?),
        Command::Report(w) => commands::report(merge(w.opts, w.config.as_deref(), "report")?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or_default();
            eprintln!("eglf: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(manifest) => {
            println!("{}", serde_json::to_string_pretty(&manifest.results).expect("results serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("eglf: {e}");
            ExitCode::FAILURE
        }
    }
}
