//! The subcommands, callable as library functions.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use eglf_core::abc::{abc_rejection, AbcConfig};
use eglf_core::classifier::{train as fit, Classifier, TrainConfig};
use eglf_core::dataset::{build_dataset, l1_distance, Dataset};
use eglf_core::formats::{read_chain_csv, read_dataset_csv, write_chain_csv, write_dataset_csv, ABC_CHAIN_ID};
use eglf_core::rng::{seeded, task_rng};
use eglf_core::sampler::{run_chains, ChainConfig, ProposalSpec};
use eglf_core::simulators::{Observation, ParamVector, Prior, Problem, Simulator};
use eglf_core::stats::{mean, std_dev, PosteriorSummary};
use log::{info, warn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Context, Result};
use crate::manifest::{manifest_path, RunManifest};
use crate::options::{required, AbcOpts, CheckEpsOpts, EpsMode, GenDataOpts, ReportOpts, SampleOpts, TrainOpts};
use crate::report::{summary_csv, Histogram, IMAGE_HEIGHT};

pub const PAPER_DATASET: usize = 1_000_000;
pub const DESK_DATASET: usize = 50_000;
pub const PAPER_CHAIN: usize = 1_000_000;
pub const PAPER_BURN_IN: usize = 10_000;
pub const DESK_CHAIN: usize = 100_000;
pub const DESK_BURN_IN: usize = 1_000;
pub const PAPER_ABC_TARGET: usize = 1_000_000;
pub const DESK_ABC_TARGET: usize = 10_000;
pub const PAPER_ABC_BUDGET: u64 = 1_000_000_000;
pub const DESK_ABC_BUDGET: u64 = 100_000_000;
pub const DEFAULT_CHECK_DRAWS: usize = 10_000;
pub const DEFAULT_BINS: usize = 64;

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).in_file(path)?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).in_file(path)?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().in_file(path)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string(value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).in_file(path)
}

pub fn read_checkpoint(path: &Path) -> Result<Classifier> {
    Classifier::read_checkpoint(open(path)?).in_file(path)
}

/// `x_o` from a JSON array file, or simulated from the problem's `theta*`
/// with `xo_seed`.
pub fn reference_observation(problem: Problem, xo: Option<&Path>, xo_seed: u64) -> Result<Observation> {
    let x_o = match xo {
        Some(path) => {
            let text = fs::read_to_string(path).in_file(path)?;
            Observation(serde_json::from_str(&text).in_file(path)?)
        }
        None => problem.simulate(&problem.theta_star(), &mut seeded(xo_seed))?,
    };
    if x_o.0.len() != problem.observation_len() {
        return Err(eglf_core::Error::DimensionMismatch {
            expected: problem.observation_len(),
            got: x_o.0.len(),
        }
        .into());
    }
    Ok(x_o)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenDataResults {
    pub records: usize,
    /// Parameter x_o was simulated from, when not read from a file.
    pub theta_star: Option<Vec<f64>>,
    pub eps_min: f64,
    pub eps_max: f64,
}

pub fn gen_data(opts: GenDataOpts) -> Result<RunManifest> {
    let problem = required(opts.problem, "problem")?;
    let out = required(opts.out, "out")?;
    let desk = opts.desk.unwrap_or(false);
    let n = opts.n.unwrap_or(if desk { DESK_DATASET } else { PAPER_DATASET });
    let seed = opts.seed.unwrap_or(0);
    let xo_seed = opts.xo_seed.unwrap_or(0);

    let x_o = reference_observation(problem, opts.xo.as_deref(), xo_seed)?;
    info!("simulating {n} {problem} records");
    let data = build_dataset(&problem, &problem.prior(), &x_o, n, seed)?;
    let mut w = create(&out)?;
    write_dataset_csv(&mut w, data.raw_records()).in_file(&out)?;
    finish(w, &out)?;
    let xo_path = out.with_extension("xo.json");
    write_json(&xo_path, &x_o.0)?;

    let results = GenDataResults {
        records: n,
        theta_star: opts.xo.is_none().then(|| problem.theta_star().into_inner()),
        eps_min: data.scaling.eps_min,
        eps_max: data.scaling.eps_max,
    };
    let resolved = GenDataOpts {
        problem: Some(problem),
        n: Some(n),
        seed: Some(seed),
        out: Some(out.clone()),
        xo: opts.xo,
        xo_seed: Some(xo_seed),
        desk: Some(desk),
    };
    let mut manifest = RunManifest::new("gen-data", &resolved)
        .artifact("dataset", &out)
        .artifact("xo", &xo_path)
        .results(&results);
    manifest.problem = Some(problem);
    manifest.seed = Some(seed);
    manifest.scaling = Some(data.scaling);
    manifest.write(&manifest_path(&out))?;
    Ok(manifest)
}

/// Problem from the flag, else from the dataset's manifest.
fn dataset_problem(flag: Option<Problem>, data: &Path) -> Result<Problem> {
    if let Some(p) = flag {
        return Ok(p);
    }
    let path = manifest_path(data);
    let recorded = if path.exists() { RunManifest::read(&path)?.problem } else { None };
    recorded.ok_or_else(|| {
        CliError::Config(format!(
            "missing required option `problem` ({} records none)",
            path.display()
        ))
    })
}

pub fn train(opts: TrainOpts) -> Result<RunManifest> {
    let data_path = required(opts.data, "data")?;
    let out = required(opts.out, "out")?;
    let problem = dataset_problem(opts.problem, &data_path)?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        batch_size: opts.batch_size.unwrap_or(defaults.batch_size),
        max_epochs: opts.max_epochs.unwrap_or(defaults.max_epochs),
        patience: opts.patience.unwrap_or(defaults.patience),
        validation_fraction: opts.validation_fraction.unwrap_or(defaults.validation_fraction),
        learning_rate: opts.learning_rate.unwrap_or(defaults.learning_rate),
        hidden: opts.hidden.unwrap_or(defaults.hidden),
        seed: opts.seed.unwrap_or(defaults.seed),
    };

    let records = read_dataset_csv(open(&data_path)?).in_file(&data_path)?;
    let dataset = Dataset::from_raw(&problem.prior(), records).in_file(&data_path)?;
    info!("training on {} records", dataset.len());
    let (mut clf, report) = fit(&dataset, &config)?;
    clf.problem = Some(problem);
    info!(
        "best validation loss {:.4} at epoch {} of {}",
        report.best_validation_loss,
        report.best_epoch,
        report.validation_losses.len()
    );
    let mut w = create(&out)?;
    clf.write_checkpoint(&mut w).in_file(&out)?;
    finish(w, &out)?;

    let resolved = TrainOpts {
        data: Some(data_path.clone()),
        problem: Some(problem),
        out: Some(out.clone()),
        batch_size: Some(config.batch_size),
        max_epochs: Some(config.max_epochs),
        patience: Some(config.patience),
        validation_fraction: Some(config.validation_fraction),
        learning_rate: Some(config.learning_rate),
        hidden: Some(config.hidden.clone()),
        seed: Some(config.seed),
    };
    let mut manifest = RunManifest::new("train", &resolved)
        .artifact("dataset", &data_path)
        .artifact("checkpoint", &out)
        .results(&report);
    manifest.problem = Some(problem);
    manifest.seed = Some(config.seed);
    manifest.scaling = Some(dataset.scaling);
    manifest.write(&manifest_path(&out))?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResults {
    pub eps_raw: f64,
    pub eps_scaled: f64,
    pub burn_in: usize,
    pub chains: usize,
    pub accepted: u64,
    pub proposals: u64,
    pub summary: PosteriorSummary,
}

pub fn sample(opts: SampleOpts) -> Result<RunManifest> {
    let checkpoint = required(opts.checkpoint, "checkpoint")?;
    let out = required(opts.out, "out")?;
    let clf = read_checkpoint(&checkpoint)?;
    let prior = Prior::new(clf.scaling.theta_lower.clone(), clf.scaling.theta_upper.clone())?;
    let desk = opts.desk.unwrap_or(false);
    let eps_mode = opts.eps.unwrap_or(EpsMode::Min);
    let n = opts.n.unwrap_or(if desk { DESK_CHAIN } else { PAPER_CHAIN });
    let burn_in = opts.burn_in.unwrap_or(if desk { DESK_BURN_IN } else { PAPER_BURN_IN });
    let n_chains = opts.chains.unwrap_or(1);
    let seed = opts.seed.unwrap_or(0);
    if n_chains == 0 {
        return Err(CliError::Config("`chains` must be at least 1".into()));
    }
    let theta0 = match opts.theta0 {
        Some(v) => ParamVector::new(v)?,
        None => prior.midpoint(),
    };
    let proposal = match opts.sigma {
        Some(s) => ProposalSpec::new(s)?,
        None => ProposalSpec::default_for(&prior),
    };

    let eps_raw = match eps_mode {
        EpsMode::Min => clf.scaling.unscale_eps(0.0),
        EpsMode::Raw(v) => v,
    };
    let eps_scaled = clf.scaling.scale_eps(eps_raw)?;
    let mut warnings = Vec::new();
    if !(0.0..=1.0).contains(&eps_scaled) {
        let msg = format!(
            "eps {eps_raw} lies outside the training range [{}, {}]; the classifier is extrapolating",
            clf.scaling.eps_min, clf.scaling.eps_max
        );
        warn!("{msg}");
        warnings.push(msg);
    }

    let config = ChainConfig {
        n,
        burn_in,
        theta0: theta0.clone(),
        eps: eps_raw,
        seed,
    };
    let ratio = |eps: f64, theta: &[f64]| clf.log_ratio(eps, theta).unwrap_or(f64::NAN);
    info!("running {n_chains} chain(s) of {n} states after {burn_in} burn-in");
    let chains = run_chains(&ratio, &prior, &proposal, &config, n_chains)?;

    let ids: Vec<String> = (0..n_chains).map(|c| c.to_string()).collect();
    let mut w = create(&out)?;
    write_chain_csv(
        &mut w,
        prior.dim(),
        chains.iter().zip(&ids).flat_map(|(chain, id)| {
            chain.states.iter().enumerate().map(move |(i, s)| (id.as_str(), i as u64, &s[..]))
        }),
    )
    .in_file(&out)?;
    finish(w, &out)?;

    let accepted: u64 = chains.iter().map(|c| c.accepted).sum();
    let proposals: u64 = chains.iter().map(|c| c.proposals).sum();
    let summary = PosteriorSummary::from_states(
        chains.iter().flat_map(|c| c.states.iter().map(|s| &s[..])),
        Some(accepted as f64 / proposals as f64),
    )?;
    info!("acceptance rate {:.3}", accepted as f64 / proposals as f64);

    let resolved = SampleOpts {
        checkpoint: Some(checkpoint.clone()),
        out: Some(out.clone()),
        eps: Some(eps_mode),
        n: Some(n),
        burn_in: Some(burn_in),
        theta0: Some(theta0.into_inner()),
        sigma: Some(proposal.sigma().to_vec()),
        chains: Some(n_chains),
        seed: Some(seed),
        desk: Some(desk),
    };
    let results = SampleResults {
        eps_raw,
        eps_scaled,
        burn_in,
        chains: n_chains,
        accepted,
        proposals,
        summary,
    };
    let mut manifest = RunManifest::new("sample", &resolved)
        .artifact("checkpoint", &checkpoint)
        .artifact("chain", &out)
        .results(&results);
    manifest.problem = clf.problem;
    manifest.seed = Some(seed);
    manifest.scaling = Some(clf.scaling.clone());
    manifest.warnings = warnings;
    manifest.write(&manifest_path(&out))?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcResults {
    pub accepted: usize,
    pub simulations_used: u64,
    pub acceptance_rate: f64,
    pub summary: PosteriorSummary,
}

pub fn abc(opts: AbcOpts) -> Result<RunManifest> {
    let problem = required(opts.problem, "problem")?;
    let out = required(opts.out, "out")?;
    let desk = opts.desk.unwrap_or(false);
    let config = AbcConfig {
        threshold: opts.threshold.unwrap_or(problem.default_abc_threshold()),
        target: opts.target.unwrap_or(if desk { DESK_ABC_TARGET } else { PAPER_ABC_TARGET }),
        budget: opts.budget.unwrap_or(if desk { DESK_ABC_BUDGET } else { PAPER_ABC_BUDGET }),
        seed: opts.seed.unwrap_or(0),
    };
    let xo_seed = opts.xo_seed.unwrap_or(0);
    let x_o = reference_observation(problem, opts.xo.as_deref(), xo_seed)?;
    info!("rejection ABC on {problem} with threshold {}", config.threshold);
    let result = abc_rejection(&problem, &problem.prior(), &x_o, &config)?;

    let mut warnings = Vec::new();
    if result.accepted.len() < config.target {
        let msg = format!(
            "budget exhausted after {} simulations with {} of {} acceptances",
            result.simulations_used,
            result.accepted.len(),
            config.target
        );
        warn!("{msg}");
        warnings.push(msg);
    }

    let mut w = create(&out)?;
    write_chain_csv(
        &mut w,
        problem.param_dim(),
        result.thetas().enumerate().map(|(k, t)| (ABC_CHAIN_ID, k as u64, &t[..])),
    )
    .in_file(&out)?;
    finish(w, &out)?;

    let results = AbcResults {
        accepted: result.accepted.len(),
        simulations_used: result.simulations_used,
        acceptance_rate: result.acceptance_rate(),
        summary: PosteriorSummary::from_states(result.thetas().map(|t| &t[..]), Some(result.acceptance_rate()))?,
    };
    let resolved = AbcOpts {
        problem: Some(problem),
        out: Some(out.clone()),
        threshold: Some(config.threshold),
        target: Some(config.target),
        budget: Some(config.budget),
        seed: Some(config.seed),
        xo: opts.xo,
        xo_seed: Some(xo_seed),
        desk: Some(desk),
    };
    let mut manifest = RunManifest::new("abc", &resolved).artifact("samples", &out).results(&results);
    manifest.problem = Some(problem);
    manifest.seed = Some(config.seed);
    manifest.warnings = warnings;
    manifest.write(&manifest_path(&out))?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEpsResults {
    pub n_draws: usize,
    pub mean_eps: f64,
    pub std_eps: f64,
}

/// Errors of `n_draws` simulations from states drawn uniformly out of a chain.
///
/// Draw `i` picks its state and simulates with `task_rng(seed, i)`.
pub fn resimulated_errors(
    problem: Problem,
    states: &[Vec<f64>],
    x_o: &Observation,
    n_draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if states.is_empty() {
        return Err(CliError::Config("the chain has no states".into()));
    }
    let errors = (0..n_draws)
        .map(|i| {
            let mut rng = task_rng(seed, i as u64);
            let theta = &states[rng.random_range(0..states.len())];
            let x = problem.simulate(theta, &mut rng)?;
            l1_distance(&x, x_o)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(errors)
}

pub fn check_eps(opts: CheckEpsOpts) -> Result<RunManifest> {
    let chain_path = required(opts.chain, "chain")?;
    let from_checkpoint = match &opts.checkpoint {
        Some(path) => read_checkpoint(path)?.problem,
        None => None,
    };
    let problem = required(opts.problem.or(from_checkpoint), "problem")?;
    let n_draws = opts.n_draws.unwrap_or(DEFAULT_CHECK_DRAWS);
    if n_draws == 0 {
        return Err(CliError::Config("`n-draws` must be at least 1".into()));
    }
    let seed = opts.seed.unwrap_or(0);
    let xo_seed = opts.xo_seed.unwrap_or(0);
    let out = opts.out.unwrap_or_else(|| chain_path.with_extension("check-eps.json"));

    let (dim, rows) = read_chain_csv(open(&chain_path)?).in_file(&chain_path)?;
    if dim != problem.param_dim() {
        return Err(CliError::File {
            path: chain_path,
            source: eglf_core::Error::DimensionMismatch {
                expected: problem.param_dim(),
                got: dim,
            },
        });
    }
    let states: Vec<Vec<f64>> = rows.into_iter().map(|r| r.theta).collect();
    let x_o = reference_observation(problem, opts.xo.as_deref(), xo_seed)?;
    let errors = resimulated_errors(problem, &states, &x_o, n_draws, seed)
        .map_err(|e| CliError::Config(format!("{}: {e}", chain_path.display())))?;
    let results = CheckEpsResults {
        n_draws,
        mean_eps: mean(&errors),
        std_eps: if n_draws > 1 { std_dev(&errors) } else { 0.0 },
    };
    info!("resimulated error: mean {} std {}", results.mean_eps, results.std_eps);

    let resolved = CheckEpsOpts {
        chain: Some(chain_path.clone()),
        problem: Some(problem),
        checkpoint: opts.checkpoint.clone(),
        n_draws: Some(n_draws),
        seed: Some(seed),
        xo: opts.xo,
        xo_seed: Some(xo_seed),
        out: Some(out.clone()),
    };
    let mut manifest = RunManifest::new("check-eps", &resolved).artifact("chain", &chain_path).results(&results);
    if let Some(path) = &opts.checkpoint {
        manifest = manifest.artifact("checkpoint", path);
    }
    manifest.problem = Some(problem);
    manifest.seed = Some(seed);
    manifest.write(&out)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Chain,
    Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedFile {
    pub input: PathBuf,
    pub kind: InputKind,
    pub summary: PathBuf,
    pub histograms: Vec<Histogram>,
}

/// Named value columns of an input file.
pub type Columns = Vec<(String, Vec<f64>)>;

/// Columns of a chain or dataset file, by header.
pub fn read_columns(path: &Path) -> Result<(InputKind, Columns)> {
    let bytes = fs::read(path).in_file(path)?;
    if bytes.starts_with(b"chain_id") {
        let (dim, rows) = read_chain_csv(&bytes[..]).in_file(path)?;
        let columns = (0..dim)
            .map(|d| (format!("theta_{d}"), rows.iter().map(|r| r.theta[d]).collect()))
            .collect();
        Ok((InputKind::Chain, columns))
    } else {
        let records = read_dataset_csv(&bytes[..]).in_file(path)?;
        let dim = records.first().map_or(0, |(t, _)| t.dim());
        let mut columns: Columns = (0..dim)
            .map(|d| (format!("theta_{d}"), records.iter().map(|(t, _)| t[d]).collect()))
            .collect();
        columns.push(("eps".into(), records.iter().map(|(_, e)| *e).collect()));
        Ok((InputKind::Dataset, columns))
    }
}

pub fn report(opts: ReportOpts) -> Result<RunManifest> {
    let inputs = required(opts.input, "input")?;
    if inputs.is_empty() {
        return Err(CliError::Config("missing required option `input`".into()));
    }
    let out_dir = required(opts.out_dir, "out-dir")?;
    let bins = opts.bins.unwrap_or(DEFAULT_BINS);
    if bins == 0 {
        return Err(CliError::Config("`bins` must be at least 1".into()));
    }
    fs::create_dir_all(&out_dir).in_file(&out_dir)?;

    let mut manifest = RunManifest::new(
        "report",
        &ReportOpts {
            input: Some(inputs.clone()),
            out_dir: Some(out_dir.clone()),
            bins: Some(bins),
        },
    );
    let mut files = Vec::new();
    for input in &inputs {
        let (kind, columns) = read_columns(input)?;
        let stem = input.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
        let summary = out_dir.join(format!("{stem}.summary.csv"));
        fs::write(&summary, summary_csv(&columns).in_file(input)?).in_file(&summary)?;
        manifest = manifest.artifact(&format!("{stem}.summary"), &summary);
        let mut histograms = Vec::new();
        for (name, values) in &columns {
            let hist = Histogram::of(name, values, bins);
            let image = out_dir.join(format!("{stem}.{name}.pgm"));
            fs::write(&image, hist.to_pgm(IMAGE_HEIGHT)).in_file(&image)?;
            manifest = manifest.artifact(&format!("{stem}.{name}"), &image);
            histograms.push(hist);
        }
        files.push(ReportedFile {
            input: input.clone(),
            kind,
            summary,
            histograms,
        });
    }
    manifest = manifest.results(&files);
    manifest.write(&out_dir.join("report.manifest.json"))?;
    Ok(manifest)
}
