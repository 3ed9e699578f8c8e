//! Error-guided likelihood-free MCMC.
//!
//! A classifier is trained to tell corresponding `(eps, theta)` pairs, where
//! `eps = d(x, x_o)` is the L1 error of a simulation from `theta`, apart from
//! shuffled ones. Its logit estimates `log p(eps | theta) / p(eps)`, which
//! drives a Metropolis-Hastings sampler for `p(theta | eps)`. A rejection-ABC
//! baseline and the benchmark simulators live alongside.
//!
//! ```no_run
//! use eglf_core::prelude::*;
//!
//! let problem = Problem::Circle;
//! let prior = problem.prior();
//! let x_o = problem.simulate(&problem.theta_star(), &mut seeded(0))?;
//! let data = build_dataset(&problem, &prior, &x_o, 50_000, 1)?;
//! let (clf, _report) = train(&data, &TrainConfig::default())?;
//! let eps_min = clf.scaling.unscale_eps(0.0);
//! let ratio = |eps: f64, theta: &[f64]| clf.log_ratio(eps, theta).expect("dimensions match");
//! let config = ChainConfig { n: 100_000, burn_in: 1_000, theta0: prior.midpoint(), eps: eps_min, seed: 2 };
//! let chain = run_chain(&ratio, &prior, &ProposalSpec::default_for(&prior), &config)?;
//! # Ok::<(), eglf_core::Error>(())
//! ```

pub mod abc;
pub mod classifier;
pub mod dataset;
mod error;
pub mod formats;
pub mod rng;
pub mod sampler;
pub mod simulators;
pub mod stats;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::abc::{abc_rejection, AbcConfig, AbcResult, AcceptedDraw};
    pub use crate::classifier::{train, Classifier, TrainConfig, TrainReport};
    pub use crate::dataset::{build_dataset, l1_distance, Dataset, ErrorSample, ScalingSpec};
    pub use crate::rng::{derive_seed, seeded, SimRng};
    pub use crate::sampler::{mh_transition, run_chain, run_chains, Chain, ChainConfig, ProposalSpec};
    pub use crate::simulators::{Observation, ParamVector, Prior, Problem, Simulator};
    pub use crate::stats::PosteriorSummary;
    pub use crate::{Error, Result};
}
