use ndarray::Zip;

use super::mlp::{Gradients, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected adaptive moment estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    pub step: u64,
    first: Gradients,
    second: Gradients,
}

impl Adam {
    pub fn new(net: &Mlp, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            first: Gradients::zeros_like(net),
            second: Gradients::zeros_like(net),
        }
    }

    fn check(&self, net: &Mlp, grads: &Gradients) -> Result<()> {
        let shapes_agree = net.layers.len() == grads.layers.len()
            && self.first.layers.len() == net.layers.len()
            && net.layers.iter().zip(&grads.layers).zip(&self.first.layers).all(|((p, g), m)| {
                p.weight.dim() == g.weight.dim()
                    && p.bias.len() == g.bias.len()
                    && p.weight.dim() == m.weight.dim()
                    && p.bias.len() == m.bias.len()
            });
        if shapes_agree {
            Ok(())
        } else {
            Err(Error::InvalidConfig("optimizer, parameter and gradient shapes disagree".into()))
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) -> Result<()> {
        self.check(net, grads)?;
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let update = |p: &mut f64, g: &f64, m: &mut f64, v: &mut f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        };
        for (((p, g), m), v) in net
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first.layers)
            .zip(&mut self.second.layers)
        {
            Zip::from(&mut p.weight)
                .and(&g.weight)
                .and(&mut m.weight)
                .and(&mut v.weight)
                .for_each(update);
            Zip::from(&mut p.bias)
                .and(&g.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .for_each(update);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::mlp::Architecture;
    use crate::rng::seeded;

    fn net() -> Mlp {
        Mlp::init(Architecture::for_param_dim(2, vec![3]), &mut seeded(1)).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut n = net();
        let before = n.clone();
        let mut adam = Adam::new(&n, AdamConfig::default());
        adam.step(&mut n, &Gradients::zeros_like(&before)).unwrap();
        assert_eq!(n, before);
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn first_step_matches_hand_trace() {
        let mut n = net();
        let before = n.clone();
        let mut grads = Gradients::zeros_like(&n);
        grads.layers[0].weight[[0, 0]] = 0.3;
        grads.layers[0].weight[[1, 2]] = -2.5;
        grads.layers[1].bias[0] = 1e-3;
        let mut adam = Adam::new(&n, AdamConfig::default());
        adam.step(&mut n, &grads).unwrap();
        // t = 1: m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + 1e-8).
        for (g, p0, p1) in [
            (0.3, before.layers[0].weight[[0, 0]], n.layers[0].weight[[0, 0]]),
            (-2.5, before.layers[0].weight[[1, 2]], n.layers[0].weight[[1, 2]]),
            (1e-3, before.layers[1].bias[0], n.layers[1].bias[0]),
        ] {
            let m = 0.1 * g / 0.1;
            let v = 0.001 * g * g / 0.001;
            let expected = p0 - 1e-4 * m / (f64::sqrt(v) + 1e-8);
            assert!((p1 - expected).abs() < 1e-15, "{p1} vs {expected}");
            assert!(((p0 - p1).abs() - 1e-4).abs() < 1e-9);
        }
        assert_eq!(n.layers[0].weight[[0, 1]], before.layers[0].weight[[0, 1]]);
    }

    #[test]
    fn deterministic() {
        let mut grads = Gradients::zeros_like(&net());
        grads.layers[0].weight.fill(0.7);
        let run = || {
            let mut n = net();
            let mut adam = Adam::new(&n, AdamConfig::default());
            for _ in 0..5 {
                adam.step(&mut n, &grads).unwrap();
            }
            n
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut n = net();
        let other = Mlp::zeros(Architecture::for_param_dim(3, vec![3])).unwrap();
        let mut adam = Adam::new(&n, AdamConfig::default());
        assert!(adam.step(&mut n, &Gradients::zeros_like(&other)).is_err());
    }
}
