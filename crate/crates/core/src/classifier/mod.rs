//! The `(eps, theta)` ratio classifier.
//!
//! An optimally trained classifier outputs
//! `s = p(eps, theta) / (p(eps, theta) + p(eps) p(theta))`, so its logit is the
//! log likelihood-to-evidence ratio `log p(eps | theta) / p(eps)`.

mod adam;
mod checkpoint;
mod loss;
mod mlp;
mod train;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::CHECKPOINT_FORMAT_VERSION;
pub use loss::{bce, joint_loss, joint_loss_and_grad, PairBatch, BCE_CLAMP};
pub use mlp::{selu, sigmoid, Activation, Architecture, ForwardCache, Gradients, Layer, Mlp, SELU_ALPHA, SELU_LAMBDA};
pub use train::{train, TrainConfig, TrainReport};

use crate::dataset::ScalingSpec;
use crate::error::{Error, Result};
use crate::simulators::Problem;

/// A trained network together with the scaling it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub net: Mlp,
    pub scaling: ScalingSpec,
    pub seed: u64,
    pub problem: Option<Problem>,
}

impl Classifier {
    pub fn param_dim(&self) -> usize {
        self.net.arch.input_dim - 1
    }

    fn input(&self, eps_scaled: f64, theta_scaled: &[f64]) -> Result<Vec<f64>> {
        if theta_scaled.len() != self.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim(),
                got: theta_scaled.len(),
            });
        }
        let mut x = Vec::with_capacity(theta_scaled.len() + 1);
        x.push(eps_scaled);
        x.extend_from_slice(theta_scaled);
        Ok(x)
    }

    /// Classifier output on already-scaled inputs.
    pub fn forward(&self, eps_scaled: f64, theta_scaled: &[f64]) -> Result<f64> {
        self.net.probability(&self.input(eps_scaled, theta_scaled)?)
    }

    /// `log s - log(1 - s)` on already-scaled inputs.
    ///
    /// Evaluated as the network's logit, which is the same quantity without
    /// the saturation of `s` near 0 and 1.
    pub fn log_ratio_scaled(&self, eps_scaled: f64, theta_scaled: &[f64]) -> Result<f64> {
        self.net.logit(&self.input(eps_scaled, theta_scaled)?)
    }

    /// Estimated `log r(eps | theta)` for raw inputs.
    ///
    /// Errors outside the training range are extrapolated, not clamped.
    pub fn log_ratio(&self, eps_raw: f64, theta_raw: &[f64]) -> Result<f64> {
        let (theta, eps) = self.scaling.apply(theta_raw, eps_raw)?;
        self.log_ratio_scaled(eps, &theta)
    }
}
