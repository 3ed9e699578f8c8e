//! Joint binary cross-entropy over corresponding and shuffled `(eps, theta)` pairs.

use ndarray::{s, Array1, Array2};

use super::mlp::{sigmoid, Gradients, Mlp};
use crate::dataset::ErrorSample;
use crate::error::{Error, Result};

/// Probabilities are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` inside the loss.
pub const BCE_CLAMP: f64 = 1e-7;

/// Scaled `(eps, theta)` pairs drawn together from the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub eps: Array1<f64>,
    pub theta: Array2<f64>,
}

impl PairBatch {
    pub fn new(eps: Array1<f64>, theta: Array2<f64>) -> Result<Self> {
        if eps.len() != theta.nrows() {
            return Err(Error::DimensionMismatch {
                expected: theta.nrows(),
                got: eps.len(),
            });
        }
        Ok(Self { eps, theta })
    }

    pub fn from_samples<'a>(samples: impl ExactSizeIterator<Item = &'a ErrorSample>) -> Result<Self> {
        let mut eps = Vec::with_capacity(samples.len());
        let mut theta = Vec::new();
        let mut dim = None;
        for s in samples {
            if *dim.get_or_insert(s.theta_scaled.len()) != s.theta_scaled.len() {
                return Err(Error::DimensionMismatch {
                    expected: dim.unwrap_or_default(),
                    got: s.theta_scaled.len(),
                });
            }
            eps.push(s.eps_scaled);
            theta.extend_from_slice(&s.theta_scaled);
        }
        let rows = eps.len();
        let theta = Array2::from_shape_vec((rows, dim.unwrap_or(0)), theta)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Self::new(Array1::from(eps), theta)
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }
}

/// Mean binary cross-entropy of probabilities against a constant label.
pub fn bce(probs: &[f64], label: f64) -> f64 {
    let sum: f64 = probs
        .iter()
        .map(|&p| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            -(label * p.ln() + (1.0 - label) * (1.0 - p).ln())
        })
        .sum();
    sum / probs.len() as f64
}

/// The four `(eps, theta)` combinations of a batch pair, with their labels.
///
/// Row blocks, in order: `(eps, theta) -> 1`, `(eps', theta) -> 0`,
/// `(eps', theta') -> 1`, `(eps, theta') -> 0`.
fn stacked_inputs(a: &PairBatch, b: &PairBatch) -> Array2<f64> {
    let m = a.len();
    let d = a.theta.ncols();
    let mut x = Array2::zeros((4 * m, d + 1));
    let blocks = [(&a.eps, &a.theta), (&b.eps, &a.theta), (&b.eps, &b.theta), (&a.eps, &b.theta)];
    for (k, (eps, theta)) in blocks.into_iter().enumerate() {
        let rows = k * m..(k + 1) * m;
        x.slice_mut(s![rows.clone(), 0]).assign(eps);
        x.slice_mut(s![rows, 1..]).assign(theta);
    }
    x
}

const LABELS: [f64; 4] = [1.0, 0.0, 1.0, 0.0];

fn check_pair(net: &Mlp, a: &PairBatch, b: &PairBatch) -> Result<()> {
    if a.len() < 2 || b.len() != a.len() {
        return Err(Error::InvalidConfig(format!(
            "joint loss needs two batches of equal size >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d = net.arch.input_dim - 1;
    for t in [&a.theta, &b.theta] {
        if t.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: t.ncols(),
            });
        }
    }
    Ok(())
}

/// Sums each block's mean BCE as `(t1 + t2) + (t3 + t4)`.
fn block_losses(logits: &Array1<f64>, m: usize) -> [f64; 4] {
    let mut terms = [0.0; 4];
    for (k, term) in terms.iter_mut().enumerate() {
        let probs: Vec<f64> = logits.slice(s![k * m..(k + 1) * m]).iter().map(|&z| sigmoid(z)).collect();
        *term = bce(&probs, LABELS[k]);
    }
    terms
}

fn combine(t: [f64; 4]) -> f64 {
    (t[0] + t[1]) + (t[2] + t[3])
}

/// `L = L_a + L_b` with
/// `L_a = BCE(s(eps, theta), 1) + BCE(s(eps', theta), 0)` and
/// `L_b = BCE(s(eps', theta'), 1) + BCE(s(eps, theta'), 0)`.
pub fn joint_loss(net: &Mlp, a: &PairBatch, b: &PairBatch) -> Result<f64> {
    check_pair(net, a, b)?;
    let logits = net.logits(stacked_inputs(a, b).view())?;
    Ok(combine(block_losses(&logits, a.len())))
}

/// Joint loss and its exact parameter gradients.
pub fn joint_loss_and_grad(net: &Mlp, a: &PairBatch, b: &PairBatch) -> Result<(f64, Gradients)> {
    check_pair(net, a, b)?;
    let m = a.len();
    let (logits, cache) = net.forward_cached(stacked_inputs(a, b))?;
    let loss = combine(block_losses(&logits, m));
    let inv_m = 1.0 / m as f64;
    let dlogits = Array1::from_iter(logits.iter().enumerate().map(|(row, &z)| {
        let p = sigmoid(z);
        // The clamp is flat outside its range, so no gradient flows there.
        if (BCE_CLAMP..=1.0 - BCE_CLAMP).contains(&p) {
            (p - LABELS[row / m]) * inv_m
        } else {
            0.0
        }
    }));
    let (grads, _) = net.backward(&cache, &dlogits);
    Ok((loss, grads))
}
