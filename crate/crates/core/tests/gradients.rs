//! Analytic parameter gradients against central finite differences.

mod common;

use common::{central_difference, relative_error};
use eglf_core::classifier::{joint_loss, joint_loss_and_grad, Architecture, Mlp, PairBatch};
use eglf_core::rng::{seeded, SimRng};
use ndarray::{Array1, Array2};
use rand::Rng;

fn batch(rng: &mut SimRng, m: usize, d: usize) -> PairBatch {
    PairBatch::new(
        Array1::from_iter((0..m).map(|_| rng.random::<f64>())),
        Array2::from_shape_fn((m, d), |_| rng.random::<f64>()),
    )
    .unwrap()
}

/// Perturbs one parameter (layer, flat index, is_bias) through a closure over the flat vector.
fn loss_at(net: &Mlp, layer: usize, bias: bool, index: usize, value: f64, a: &PairBatch, b: &PairBatch) -> f64 {
    let mut n = net.clone();
    if bias {
        n.layers[layer].bias[index] = value;
    } else {
        let cols = n.layers[layer].weight.ncols();
        n.layers[layer].weight[[index / cols, index % cols]] = value;
    }
    joint_loss(&n, a, b).unwrap()
}

#[test]
fn parameter_gradients_match_finite_differences() {
    let mut rng = seeded(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..5 {
        let d = 1 + trial % 3;
        let mut net = Mlp::init(Architecture::for_param_dim(d, vec![4, 4, 4, 4]), &mut rng).unwrap();
        // Non-zero biases so every code path is exercised.
        for layer in &mut net.layers {
            layer.bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        }
        let (a, b) = (batch(&mut rng, 6, d), batch(&mut rng, 6, d));
        let (_, grads) = joint_loss_and_grad(&net, &a, &b).unwrap();
        for (l, layer) in net.layers.iter().enumerate() {
            for (bias, values) in [(false, layer.weight.iter().copied().collect::<Vec<_>>()), (true, layer.bias.to_vec())] {
                for (k, &v) in values.iter().enumerate() {
                    let fd = central_difference(|x| loss_at(&net, l, bias, k, x[0], &a, &b), &[v], 0, 1e-5);
                    let analytic = if bias {
                        grads.layers[l].bias[k]
                    } else {
                        grads.layers[l].weight.as_slice().unwrap()[k]
                    };
                    // Gradients that are essentially zero are compared absolutely.
                    let err = if fd.abs().max(analytic.abs()) < 1e-7 {
                        (fd - analytic).abs()
                    } else {
                        relative_error(fd, analytic)
                    };
                    worst = worst.max(err);
                }
            }
        }
    }
    println!("max relative gradient error {worst:e}");
    assert!(worst < 1e-4, "max relative error {worst}");
}
