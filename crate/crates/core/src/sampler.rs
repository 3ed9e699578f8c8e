//! Error-guided Metropolis-Hastings.
//!
//! The target is `r(eps | theta) p(theta)` for a fixed conditioning error
//! `eps`, where `log r` comes from a ratio estimator. Proposals are a
//! symmetric Gaussian random walk, so the proposal-density ratio cancels.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, SimRng};
use crate::simulators::{ParamVector, Prior};

/// `lambda` is capped here before exponentiation; `rho` saturates at 1 anyway.
pub const MAX_LOG_ACCEPT: f64 = 50.0;

/// Per-dimension standard deviations of the random-walk proposal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalSpec {
    sigma: Vec<f64>,
}

impl ProposalSpec {
    pub fn new(sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() || sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidConfig("proposal standard deviations must be positive".into()));
        }
        Ok(Self { sigma })
    }

    /// `sigma_i = 0.05 * (upper_i - lower_i)`.
    pub fn default_for(prior: &Prior) -> Self {
        Self {
            sigma: prior.widths().map(|w| 0.05 * w).collect(),
        }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.sigma.iter().map(|s| s * factor).collect())
    }

    fn propose(&self, theta: &[f64], rng: &mut SimRng) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.sigma)
            .map(|(t, s)| t + s * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Number of retained states.
    pub n: usize,
    pub burn_in: usize,
    pub theta0: ParamVector,
    /// Conditioning error, in the units the ratio function expects.
    pub eps: f64,
    pub seed: u64,
}

/// Retained states after burn-in, with acceptance counts over those steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub states: Vec<ParamVector>,
    pub accepted: u64,
    pub proposals: u64,
}

impl Chain {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.dim())
    }

    /// Values of dimension `d` across the chain.
    pub fn marginal(&self, d: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[d]).collect()
    }
}

/// One proposal from `theta` whose log target is `current`.
///
/// Returns the proposed point and its log target when accepted.
fn step<R>(
    theta: &[f64],
    current: f64,
    eps: f64,
    ratio_fn: &R,
    prior: &Prior,
    proposal: &ProposalSpec,
    rng: &mut SimRng,
) -> Option<(Vec<f64>, f64)>
where
    R: Fn(f64, &[f64]) -> f64 + ?Sized,
{
    let candidate = proposal.propose(theta, rng);
    // Outside the box the prior is log-zero: reject without consulting the estimator.
    if !prior.contains(&candidate) {
        return None;
    }
    let log_prior = prior.log_density(&candidate).ok()?;
    let proposed = ratio_fn(eps, &candidate) + log_prior;
    let lambda = proposed - current;
    if lambda.is_nan() {
        return None;
    }
    let accept = lambda >= 0.0 || rng.random::<f64>() < lambda.min(MAX_LOG_ACCEPT).exp();
    accept.then_some((candidate, proposed))
}

fn log_target<R>(eps: f64, theta: &[f64], ratio_fn: &R, prior: &Prior) -> Result<f64>
where
    R: Fn(f64, &[f64]) -> f64 + ?Sized,
{
    Ok(ratio_fn(eps, theta) + prior.log_density(theta)?)
}

/// A single Metropolis-Hastings transition.
///
/// `lambda = (log r(eps|theta') + log p(theta')) - (log r(eps|theta_t) + log p(theta_t))`
/// and the move is accepted with probability `min(exp(lambda), 1)`.
pub fn mh_transition<R>(
    theta_t: &ParamVector,
    eps: f64,
    ratio_fn: &R,
    prior: &Prior,
    proposal: &ProposalSpec,
    rng: &mut SimRng,
) -> Result<(ParamVector, bool)>
where
    R: Fn(f64, &[f64]) -> f64 + ?Sized,
{
    check_dims(theta_t, prior, proposal)?;
    let current = log_target(eps, theta_t, ratio_fn, prior)?;
    Ok(match step(theta_t, current, eps, ratio_fn, prior, proposal, rng) {
        Some((next, _)) => (ParamVector::new(next)?, true),
        None => (theta_t.clone(), false),
    })
}

fn check_dims(theta: &[f64], prior: &Prior, proposal: &ProposalSpec) -> Result<()> {
    for got in [theta.len(), proposal.sigma.len()] {
        if got != prior.dim() {
            return Err(Error::DimensionMismatch {
                expected: prior.dim(),
                got,
            });
        }
    }
    Ok(())
}

/// Runs `burn_in` discarded transitions followed by `n` retained ones.
///
/// A rejected proposal retains the current state.
pub fn run_chain<R>(ratio_fn: &R, prior: &Prior, proposal: &ProposalSpec, config: &ChainConfig) -> Result<Chain>
where
    R: Fn(f64, &[f64]) -> f64 + ?Sized,
{
    if config.n == 0 {
        return Err(Error::InvalidConfig("chain length must be at least 1".into()));
    }
    check_dims(&config.theta0, prior, proposal)?;
    if !prior.contains(&config.theta0) {
        return Err(Error::OutOfRange(format!(
            "initial state {:?} lies outside the prior support",
            &config.theta0[..]
        )));
    }
    let mut rng = seeded(config.seed);
    let mut theta = config.theta0.clone();
    let mut current = log_target(config.eps, &theta, ratio_fn, prior)?;
    let mut states = Vec::with_capacity(config.n);
    let mut accepted = 0;
    for t in 0..config.burn_in + config.n {
        if let Some((next, value)) = step(&theta, current, config.eps, ratio_fn, prior, proposal, &mut rng) {
            theta = ParamVector::new(next)?;
            current = value;
            if t >= config.burn_in {
                accepted += 1;
            }
        }
        if t >= config.burn_in {
            states.push(theta.clone());
        }
    }
    Ok(Chain {
        states,
        accepted,
        proposals: config.n as u64,
    })
}

/// Independent chains in parallel; chain `c` is seeded with
/// `derive_seed(config.seed, c)`.
pub fn run_chains<R>(
    ratio_fn: &R,
    prior: &Prior,
    proposal: &ProposalSpec,
    config: &ChainConfig,
    n_chains: usize,
) -> Result<Vec<Chain>>
where
    R: Fn(f64, &[f64]) -> f64 + Sync + ?Sized,
{
    (0..n_chains)
        .into_par_iter()
        .map(|c| {
            let cfg = ChainConfig {
                seed: derive_seed(config.seed, c as u64),
                ..config.clone()
            };
            run_chain(ratio_fn, prior, proposal, &cfg)
        })
        .collect()
}
