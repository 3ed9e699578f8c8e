//! Fully connected SELU network with a single logit output.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;

pub fn selu(z: f64) -> f64 {
    if z > 0.0 {
        SELU_LAMBDA * z
    } else {
        SELU_LAMBDA * SELU_ALPHA * z.exp_m1()
    }
}

fn selu_derivative(z: f64) -> f64 {
    if z > 0.0 {
        SELU_LAMBDA
    } else {
        SELU_LAMBDA * SELU_ALPHA * z.exp()
    }
}

/// Logistic function, evaluated without overflow for either sign.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Selu,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
}

impl Architecture {
    /// Input is `[eps, theta_0, .., theta_{d-1}]`.
    pub fn for_param_dim(param_dim: usize, hidden: Vec<usize>) -> Self {
        Self {
            input_dim: param_dim + 1,
            hidden,
            output_dim: 1,
            activation: Activation::Selu,
        }
    }

    /// `(fan_out, fan_in)` for every layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![self.input_dim];
        widths.extend(&self.hidden);
        widths.push(self.output_dim);
        widths.windows(2).map(|w| (w[1], w[0])).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim < 2 {
            return Err(Error::InvalidConfig("network input needs eps and at least one parameter".into()));
        }
        if self.output_dim != 1 {
            return Err(Error::InvalidConfig("network output width must be 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden layer widths must be positive".into()));
        }
        Ok(())
    }
}

/// Weights are stored `(fan_out, fan_in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    fn zeros(fan_out: usize, fan_in: usize) -> Self {
        Self {
            weight: Array2::zeros((fan_out, fan_in)),
            bias: Array1::zeros(fan_out),
        }
    }
}

/// Per-layer gradients, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Layer::zeros(l.weight.nrows(), l.weight.ncols())).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Intermediate values kept for the backward pass.
pub struct ForwardCache {
    /// Input to each layer (the batch itself first).
    inputs: Vec<Array2<f64>>,
    /// Hidden pre-activations.
    pre_activations: Vec<Array2<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub arch: Architecture,
    pub layers: Vec<Layer>,
}

impl Mlp {
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let layers = arch.layer_shapes().into_iter().map(|(o, i)| Layer::zeros(o, i)).collect();
        Ok(Self { arch, layers })
    }

    /// Weights uniform on `+-1/sqrt(fan_in)`, biases zero.
    pub fn init(arch: Architecture, rng: &mut SimRng) -> Result<Self> {
        let mut net = Self::zeros(arch)?;
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.weight.ncols() as f64).sqrt();
            layer.weight.mapv_inplace(|_| rng.random_range(-bound..=bound));
        }
        Ok(net)
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    /// Checks that the layers agree with the architecture.
    pub fn check_shapes(&self) -> Result<()> {
        self.arch.validate()?;
        let shapes = self.arch.layer_shapes();
        if shapes.len() != self.layers.len() {
            return Err(Error::DimensionMismatch {
                expected: shapes.len(),
                got: self.layers.len(),
            });
        }
        for ((o, i), layer) in shapes.into_iter().zip(&self.layers) {
            if layer.weight.dim() != (o, i) || layer.bias.len() != o {
                return Err(Error::InvalidConfig(format!(
                    "layer shape {:?}/{} does not match architecture ({o}, {i})",
                    layer.weight.dim(),
                    layer.bias.len()
                )));
            }
        }
        Ok(())
    }

    fn check_input(&self, batch: &ArrayView2<f64>) -> Result<()> {
        if batch.ncols() != self.arch.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.arch.input_dim,
                got: batch.ncols(),
            });
        }
        if batch.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        Ok(())
    }

    /// Logits for each row of `batch`.
    pub fn logits(&self, batch: ArrayView2<f64>) -> Result<Array1<f64>> {
        self.check_input(&batch)?;
        let last = self.layers.len() - 1;
        let mut a = batch.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weight.t());
            z += &layer.bias;
            if l < last {
                z.mapv_inplace(selu);
            }
            a = z;
        }
        Ok(a.column(0).to_owned())
    }

    /// Logits plus the cache needed by [`Mlp::backward`].
    pub fn forward_cached(&self, batch: Array2<f64>) -> Result<(Array1<f64>, ForwardCache)> {
        self.check_input(&batch.view())?;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(last);
        let mut a = batch;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weight.t());
            z += &layer.bias;
            inputs.push(a);
            if l < last {
                a = z.mapv(selu);
                pre_activations.push(z);
            } else {
                a = z;
            }
        }
        Ok((a.column(0).to_owned(), ForwardCache { inputs, pre_activations }))
    }

    /// Back-propagates `d loss / d logit` (one entry per row).
    ///
    /// Returns the parameter gradients and `d loss / d input`.
    pub fn backward(&self, cache: &ForwardCache, dlogits: &Array1<f64>) -> (Gradients, Array2<f64>) {
        let mut delta = dlogits.view().insert_axis(Axis(1)).to_owned();
        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let weight = delta.t().dot(&cache.inputs[l]);
            let bias = delta.sum_axis(Axis(0));
            grads.push(Layer { weight, bias });
            let mut upstream = delta.dot(&layer.weight);
            if l > 0 {
                upstream.zip_mut_with(&cache.pre_activations[l - 1], |d, &z| *d *= selu_derivative(z));
            }
            delta = upstream;
        }
        grads.reverse();
        (Gradients { layers: grads }, delta)
    }

    /// Probability for a single input row, kept strictly inside `(0, 1)`.
    pub fn probability(&self, input: &[f64]) -> Result<f64> {
        let row = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let z = self.logits(row)?[0];
        Ok(sigmoid(z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    pub fn logit(&self, input: &[f64]) -> Result<f64> {
        let row = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(self.logits(row)?[0])
    }

    /// Gradient of the output probability with respect to one input row.
    pub fn input_gradient(&self, input: &[f64]) -> Result<Vec<f64>> {
        let row = Array2::from_shape_vec((1, input.len()), input.to_vec())
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let (z, cache) = self.forward_cached(row)?;
        let s = sigmoid(z[0]);
        let (_, dinput) = self.backward(&cache, &Array1::from_elem(1, s * (1.0 - s)));
        Ok(dinput.row(0).to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn small_arch() -> Architecture {
        Architecture::for_param_dim(2, vec![5, 4, 3])
    }

    #[test]
    fn selu_values() {
        assert_eq!(selu(0.0), 0.0);
        assert_eq!(selu(1.0), SELU_LAMBDA);
        assert!((selu(1.0) - 1.0507).abs() < 1e-4);
        let direct = SELU_LAMBDA * SELU_ALPHA * ((-30f64).exp() - 1.0);
        assert!((selu(-30.0) - direct).abs() < 1e-15);
        assert!((selu(-30.0) + SELU_LAMBDA * SELU_ALPHA).abs() < 1e-9);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_network_outputs_one_half() {
        let net = Mlp::zeros(small_arch()).unwrap();
        assert_eq!(net.probability(&[0.3, 0.1, 0.9]).unwrap(), 0.5);
    }

    #[test]
    fn outputs_in_open_unit_interval() {
        let mut rng = seeded(1);
        let net = Mlp::init(Architecture::for_param_dim(3, vec![16, 16]), &mut rng).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = net.probability(&x).unwrap();
            assert!(p > 0.0 && p < 1.0);
        }
    }

    #[test]
    fn layer_shapes_follow_architecture() {
        let arch = Architecture::for_param_dim(3, vec![128; 4]);
        assert_eq!(arch.layer_shapes(), vec![(128, 4), (128, 128), (128, 128), (128, 128), (1, 128)]);
        let net = Mlp::zeros(arch).unwrap();
        assert_eq!(net.num_parameters(), 4 * 128 + 128 + 3 * (128 * 128 + 128) + 128 + 1);
        net.check_shapes().unwrap();
    }

    #[test]
    fn rejects_bad_inputs() {
        let net = Mlp::zeros(small_arch()).unwrap();
        assert!(matches!(net.probability(&[0.1, 0.2]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(net.probability(&[0.1, f64::NAN, 0.2]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut rng = seeded(2);
        for _ in 0..5 {
            let net = Mlp::init(small_arch(), &mut rng).unwrap();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let analytic = net.input_gradient(&x).unwrap();
            let h = 1e-5;
            for i in 0..3 {
                let mut up = x.clone();
                let mut down = x.clone();
                up[i] += h;
                down[i] -= h;
                let fd = (net.probability(&up).unwrap() - net.probability(&down).unwrap()) / (2.0 * h);
                let rel = (fd - analytic[i]).abs() / fd.abs().max(analytic[i].abs()).max(1e-8);
                assert!(rel < 1e-4, "input {i}: fd {fd} analytic {}", analytic[i]);
            }
        }
    }
}
