//! Rejection ABC baseline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::l1_distance;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::simulators::{Observation, ParamVector, Prior, Simulator};

/// Draws evaluated per parallel round.
const ROUND: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcConfig {
    /// Accept when `d(x, x_o) <= threshold`.
    pub threshold: f64,
    /// Stop after this many acceptances.
    pub target: usize,
    /// Maximum number of simulations.
    pub budget: u64,
    pub seed: u64,
}

impl AbcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_nan() {
            return Err(Error::InvalidConfig("threshold must not be NaN".into()));
        }
        if self.target == 0 {
            return Err(Error::InvalidConfig("target must be at least 1".into()));
        }
        if self.budget < self.target as u64 {
            return Err(Error::InvalidConfig(format!(
                "budget {} is smaller than target {}",
                self.budget, self.target
            )));
        }
        Ok(())
    }
}

/// An accepted prior draw and the seed that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedDraw {
    pub theta: ParamVector,
    pub eps: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbcResult {
    pub accepted: Vec<AcceptedDraw>,
    /// Draws a sequential sampler would have made before stopping.
    pub simulations_used: u64,
}

impl AbcResult {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted.len() as f64 / self.simulations_used as f64
    }

    pub fn thetas(&self) -> impl Iterator<Item = &ParamVector> {
        self.accepted.iter().map(|a| &a.theta)
    }
}

/// Draws a parameter and simulates it from a single per-draw seed.
pub fn draw_and_simulate<S: Simulator + ?Sized>(
    simulator: &S,
    prior: &Prior,
    x_o: &Observation,
    draw_seed: u64,
) -> Result<(ParamVector, f64)> {
    let mut rng = seeded(draw_seed);
    let theta = prior.sample(&mut rng);
    let x = simulator.simulate(&theta, &mut rng)?;
    let eps = l1_distance(&x, x_o)?;
    Ok((theta, eps))
}

/// Accepts prior draws whose simulated observation lies within
/// `threshold` of `x_o`, until `target` acceptances or `budget` simulations.
///
/// Draw `i` uses seed `derive_seed(config.seed, i)`; draws are evaluated in
/// parallel rounds but the outcome equals the sequential one.
pub fn abc_rejection<S: Simulator + ?Sized>(
    simulator: &S,
    prior: &Prior,
    x_o: &Observation,
    config: &AbcConfig,
) -> Result<AbcResult> {
    config.validate()?;
    let mut accepted = Vec::with_capacity(config.target.min(1 << 20));
    let mut next = 0u64;
    while next < config.budget {
        let end = (next + ROUND).min(config.budget);
        let round = (next..end)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(config.seed, i);
                let (theta, eps) = draw_and_simulate(simulator, prior, x_o, seed)?;
                Ok((eps <= config.threshold).then_some(AcceptedDraw { theta, eps, seed }))
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, hit) in (next..end).zip(round) {
            if let Some(draw) = hit {
                accepted.push(draw);
                if accepted.len() == config.target {
                    return Ok(AbcResult {
                        accepted,
                        simulations_used: i + 1,
                    });
                }
            }
        }
        next = end;
    }
    if accepted.is_empty() {
        return Err(Error::ZeroAcceptances {
            simulations_used: config.budget,
        });
    }
    Ok(AbcResult {
        accepted,
        simulations_used: config.budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulators::Problem;

    fn toy() -> (Problem, Prior, Observation) {
        (Problem::Toy, Problem::Toy.prior(), Observation(vec![0.0]))
    }

    #[test]
    fn infinite_threshold_accepts_everything() {
        let (p, prior, x_o) = toy();
        let cfg = AbcConfig {
            threshold: f64::INFINITY,
            target: 1000,
            budget: 5000,
            seed: 1,
        };
        let res = abc_rejection(&p, &prior, &x_o, &cfg).unwrap();
        assert_eq!(res.accepted.len(), 1000);
        assert_eq!(res.simulations_used, 1000);
        assert_eq!(res.acceptance_rate(), 1.0);
    }

    #[test]
    fn impossible_threshold_reports_zero_acceptances() {
        let (p, prior, x_o) = toy();
        let cfg = AbcConfig {
            threshold: -1.0,
            target: 10,
            budget: 500,
            seed: 2,
        };
        match abc_rejection(&p, &prior, &x_o, &cfg) {
            Err(Error::ZeroAcceptances { simulations_used }) => assert_eq!(simulations_used, 500),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partial_result_when_budget_runs_out() {
        let (p, prior, x_o) = toy();
        let cfg = AbcConfig {
            threshold: 0.1,
            target: 10_000,
            budget: 10_000,
            seed: 3,
        };
        let res = abc_rejection(&p, &prior, &x_o, &cfg).unwrap();
        assert_eq!(res.simulations_used, 10_000);
        assert!(!res.accepted.is_empty() && res.accepted.len() < 10_000);
    }

    #[test]
    fn accepted_draws_replay_within_threshold() {
        let (p, prior, x_o) = toy();
        let cfg = AbcConfig {
            threshold: 0.5,
            target: 300,
            budget: 1_000_000,
            seed: 4,
        };
        let res = abc_rejection(&p, &prior, &x_o, &cfg).unwrap();
        assert!(res.simulations_used <= cfg.budget);
        for draw in &res.accepted {
            let (theta, eps) = draw_and_simulate(&p, &prior, &x_o, draw.seed).unwrap();
            assert_eq!(theta, draw.theta);
            assert_eq!(eps, draw.eps);
            assert!(eps <= cfg.threshold);
        }
    }

    #[test]
    fn result_is_independent_of_round_boundaries() {
        let (p, prior, x_o) = toy();
        let base = AbcConfig {
            threshold: 0.3,
            target: 50,
            budget: 1_000_000,
            seed: 5,
        };
        let full = abc_rejection(&p, &prior, &x_o, &base).unwrap();
        // Re-running with the budget cut exactly at the stopping point gives the same draws.
        let cut = AbcConfig {
            budget: full.simulations_used,
            ..base.clone()
        };
        assert_eq!(abc_rejection(&p, &prior, &x_o, &cut).unwrap(), full);
    }

    #[test]
    fn config_validation() {
        let (p, prior, x_o) = toy();
        for cfg in [
            AbcConfig { threshold: f64::NAN, target: 1, budget: 1, seed: 0 },
            AbcConfig { threshold: 1.0, target: 0, budget: 1, seed: 0 },
            AbcConfig { threshold: 1.0, target: 5, budget: 4, seed: 0 },
        ] {
            assert!(matches!(abc_rejection(&p, &prior, &x_o, &cfg), Err(Error::InvalidConfig(_))));
        }
    }
}
