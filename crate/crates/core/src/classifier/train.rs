use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::loss::{joint_loss, joint_loss_and_grad, PairBatch};
use super::mlp::{Architecture, Mlp};
use super::Classifier;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::task_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            max_epochs: 100,
            patience: 10,
            validation_fraction: 0.1,
            learning_rate: 1e-4,
            hidden: vec![128; 4],
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidConfig("batch_size must be at least 2".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidConfig("validation_fraction must lie in (0, 1)".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        Ok(())
    }

    /// Validation and training sizes for a dataset of `n` samples.
    fn split(&self, n: usize) -> Result<(usize, usize)> {
        let n_val = ((n as f64 * self.validation_fraction).ceil() as usize).max(2);
        let needed = 2 * self.batch_size + n_val;
        if n < needed {
            return Err(Error::DatasetTooSmall { needed, got: n });
        }
        Ok((n_val, n - n_val))
    }
}

/// Loss history of a training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Validation loss of the initial network.
    pub initial_validation_loss: f64,
    /// Mean training loss per epoch.
    pub train_losses: Vec<f64>,
    pub validation_losses: Vec<f64>,
    /// Epoch whose parameters were kept (0 = initialization).
    pub best_epoch: usize,
    pub best_validation_loss: f64,
    pub steps: u64,
}

/// Validation pairs the first half of the held-out samples with the second.
fn validation_loss(net: &Mlp, dataset: &Dataset, val: &[usize]) -> Result<f64> {
    let half = val.len() / 2;
    let a = PairBatch::from_samples(val[..half].iter().map(|&i| &dataset.samples[i]))?;
    let b = PairBatch::from_samples(val[half..2 * half].iter().map(|&i| &dataset.samples[i]))?;
    joint_loss(net, &a, &b)
}

/// Trains the ratio classifier.
///
/// Each step takes two disjoint batches from the shuffled training split;
/// the first supplies the corresponding pairs `(eps, theta)`, the second
/// `(eps', theta')`. Training stops after `max_epochs` or once the validation
/// loss has not improved for `patience` epochs, and the best-validation
/// parameters are returned.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(Classifier, TrainReport)> {
    config.validate()?;
    let (n_val, _) = config.split(dataset.len())?;
    let dim = dataset.scaling.dim();

    let arch = Architecture::for_param_dim(dim, config.hidden.clone());
    let mut net = Mlp::init(arch, &mut task_rng(config.seed, 0))?;
    let mut shuffle_rng = task_rng(config.seed, 1);

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut shuffle_rng);
    let (val, train_idx) = order.split_at(n_val);
    let mut train_idx = train_idx.to_vec();

    let mut adam = Adam::new(
        &net,
        AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        },
    );
    let initial = validation_loss(&net, dataset, val)?;
    let mut report = TrainReport {
        initial_validation_loss: initial,
        best_validation_loss: initial,
        ..TrainReport::default()
    };
    let mut best = net.clone();
    let mut stale = 0;
    let m = config.batch_size;

    for epoch in 1..=config.max_epochs {
        train_idx.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut steps = 0usize;
        for chunk in train_idx.chunks_exact(2 * m) {
            let a = PairBatch::from_samples(chunk[..m].iter().map(|&i| &dataset.samples[i]))?;
            let b = PairBatch::from_samples(chunk[m..].iter().map(|&i| &dataset.samples[i]))?;
            let (loss, grads) = joint_loss_and_grad(&net, &a, &b)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite("training loss"));
            }
            adam.step(&mut net, &grads)?;
            total += loss;
            steps += 1;
        }
        report.steps += steps as u64;
        report.train_losses.push(total / steps as f64);
        let val_loss = validation_loss(&net, dataset, val)?;
        report.validation_losses.push(val_loss);
        if val_loss < report.best_validation_loss {
            report.best_validation_loss = val_loss;
            report.best_epoch = epoch;
            best = net.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }

    Ok((
        Classifier {
            net: best,
            scaling: dataset.scaling.clone(),
            seed: config.seed,
            problem: None,
        },
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::build_dataset;
    use crate::simulators::{Observation, Problem};

    fn toy_data(n: usize) -> Dataset {
        let p = Problem::Toy;
        build_dataset(&p, &p.prior(), &Observation(vec![0.0]), n, 3).unwrap()
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            hidden: vec![16, 16],
            max_epochs: 3,
            learning_rate: 1e-3,
            seed: 11,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let data = toy_data(400);
        let config = TrainConfig {
            max_epochs: 0,
            ..small_config()
        };
        let (clf, report) = train(&data, &config).unwrap();
        let init = Mlp::init(
            Architecture::for_param_dim(1, config.hidden.clone()),
            &mut task_rng(config.seed, 0),
        )
        .unwrap();
        assert_eq!(clf.net, init);
        assert_eq!(report.best_epoch, 0);
        assert!(report.train_losses.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let data = toy_data(1000);
        let (a, ra) = train(&data, &small_config()).unwrap();
        let (b, rb) = train(&data, &small_config()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn too_small_dataset_is_rejected() {
        let data = toy_data(100);
        assert!(matches!(train(&data, &small_config()), Err(Error::DatasetTooSmall { .. })));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let data = toy_data(400);
        for config in [
            TrainConfig { batch_size: 1, ..small_config() },
            TrainConfig { validation_fraction: 0.0, ..small_config() },
            TrainConfig { validation_fraction: 1.0, ..small_config() },
        ] {
            assert!(matches!(train(&data, &config), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn patience_stops_early() {
        let data = toy_data(600);
        let config = TrainConfig {
            max_epochs: 200,
            patience: 1,
            ..small_config()
        };
        let (_, report) = train(&data, &config).unwrap();
        assert!(report.validation_losses.len() < 200);
    }
}
