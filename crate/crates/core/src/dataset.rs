//! Error datasets: `(theta, eps)` records with `eps = d(x, x_o)`.
//!
//! Observations are never kept; only the parameter and its scalar error are.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::task_rng;
use crate::simulators::{Observation, ParamVector, Prior, Simulator};

/// Sum of absolute differences.
pub fn l1_distance(x: &[f64], x_o: &[f64]) -> Result<f64> {
    if x.len() != x_o.len() {
        return Err(Error::DimensionMismatch {
            expected: x_o.len(),
            got: x.len(),
        });
    }
    Ok(x.iter().zip(x_o).map(|(a, b)| (a - b).abs()).sum())
}

/// Affine projection of parameters and errors onto `[0, 1]`.
///
/// Parameter bounds come from the prior box, error bounds from the training
/// set. Values outside the bounds map outside `[0, 1]`; nothing is clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub theta_lower: Vec<f64>,
    pub theta_upper: Vec<f64>,
    pub eps_min: f64,
    pub eps_max: f64,
}

impl ScalingSpec {
    /// Builds the spec from a prior and the observed errors.
    pub fn fit(prior: &Prior, eps: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (eps_min, eps_max) = eps
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)));
        if !eps_min.is_finite() || !eps_max.is_finite() {
            return Err(Error::NonFinite("error range"));
        }
        Ok(Self {
            theta_lower: prior.lower().to_vec(),
            theta_upper: prior.upper().to_vec(),
            eps_min,
            eps_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_lower.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.eps_max <= self.eps_min
            || self
                .theta_lower
                .iter()
                .zip(&self.theta_upper)
                .any(|(lo, hi)| hi <= lo)
    }

    fn check(&self) -> Result<()> {
        if self.theta_lower.len() != self.theta_upper.len() {
            return Err(Error::DimensionMismatch {
                expected: self.theta_lower.len(),
                got: self.theta_upper.len(),
            });
        }
        if self.eps_max <= self.eps_min {
            return Err(Error::DegenerateScaling("eps"));
        }
        if self.theta_lower.iter().zip(&self.theta_upper).any(|(lo, hi)| hi <= lo) {
            return Err(Error::DegenerateScaling("theta"));
        }
        Ok(())
    }

    pub fn scale_eps(&self, eps: f64) -> Result<f64> {
        self.check()?;
        Ok((eps - self.eps_min) / (self.eps_max - self.eps_min))
    }

    pub fn unscale_eps(&self, scaled: f64) -> f64 {
        self.eps_min + scaled * (self.eps_max - self.eps_min)
    }

    pub fn scale_theta(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check()?;
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        Ok(theta
            .iter()
            .zip(self.theta_lower.iter().zip(&self.theta_upper))
            .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
            .collect())
    }

    pub fn unscale_theta(&self, scaled: &[f64]) -> Vec<f64> {
        scaled
            .iter()
            .zip(self.theta_lower.iter().zip(&self.theta_upper))
            .map(|(s, (lo, hi))| lo + s * (hi - lo))
            .collect()
    }

    /// Scales one `(theta, eps)` record.
    pub fn apply(&self, theta: &[f64], eps: f64) -> Result<(Vec<f64>, f64)> {
        Ok((self.scale_theta(theta)?, self.scale_eps(eps)?))
    }
}

/// One training record.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    pub theta_raw: ParamVector,
    pub eps_raw: f64,
    pub theta_scaled: Vec<f64>,
    pub eps_scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<ErrorSample>,
    pub scaling: ScalingSpec,
}

impl Dataset {
    /// Fits the scaling to `records` and applies it.
    pub fn from_raw(prior: &Prior, records: Vec<(ParamVector, f64)>) -> Result<Self> {
        if let Some((bad, _)) = records.iter().find(|(t, _)| t.dim() != prior.dim()) {
            return Err(Error::DimensionMismatch {
                expected: prior.dim(),
                got: bad.dim(),
            });
        }
        if records.iter().any(|(_, e)| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidConfig("errors must be finite and non-negative".into()));
        }
        let scaling = ScalingSpec::fit(prior, records.iter().map(|(_, e)| *e))?;
        let samples = records
            .into_iter()
            .map(|(theta_raw, eps_raw)| {
                let (theta_scaled, eps_scaled) = scaling.apply(&theta_raw, eps_raw)?;
                Ok(ErrorSample {
                    theta_raw,
                    eps_raw,
                    theta_scaled,
                    eps_scaled,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { samples, scaling })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn raw_records(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.samples.iter().map(|s| (&s.theta_raw[..], s.eps_raw))
    }
}

/// Draws `n` parameters from the prior, simulates each and records its L1
/// error against `x_o`.
///
/// Sample `i` uses its own stream derived from `(seed, i)`, so the result is
/// identical however the work is scheduled.
pub fn build_dataset<S: Simulator + ?Sized>(
    simulator: &S,
    prior: &Prior,
    x_o: &Observation,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::DatasetTooSmall { needed: 2, got: n });
    }
    if prior.dim() != simulator.param_dim() {
        return Err(Error::DimensionMismatch {
            expected: simulator.param_dim(),
            got: prior.dim(),
        });
    }
    let records = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, i as u64);
            let theta = prior.sample(&mut rng);
            let x = simulator.simulate(&theta, &mut rng)?;
            let eps = l1_distance(&x, x_o)?;
            Ok((theta, eps))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_raw(prior, records)
}
