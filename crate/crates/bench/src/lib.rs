//! Fixtures shared by the benchmarks.

use eglf_core::classifier::{Architecture, Classifier, Mlp, PairBatch};
use eglf_core::dataset::ScalingSpec;
use eglf_core::rng::{seeded, SimRng};
use eglf_core::simulators::Problem;
use ndarray::{Array1, Array2};
use rand::Rng;

/// A randomly initialized circle classifier with the default architecture.
pub fn circle_classifier(seed: u64) -> Classifier {
    let problem = Problem::Circle;
    let prior = problem.prior();
    let mut rng = seeded(seed);
    Classifier {
        net: Mlp::init(Architecture::for_param_dim(3, vec![128; 4]), &mut rng).expect("valid architecture"),
        scaling: ScalingSpec {
            theta_lower: prior.lower().to_vec(),
            theta_upper: prior.upper().to_vec(),
            eps_min: 0.0,
            eps_max: 400.0,
        },
        seed,
        problem: Some(problem),
    }
}

/// Uniform scaled pairs.
pub fn pair_batch(rng: &mut SimRng, m: usize, d: usize) -> PairBatch {
    PairBatch::new(
        Array1::from_iter((0..m).map(|_| rng.random::<f64>())),
        Array2::from_shape_fn((m, d), |_| rng.random::<f64>()),
    )
    .expect("matching sizes")
}
