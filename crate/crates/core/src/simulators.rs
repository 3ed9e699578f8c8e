//! Implicit generative models and their uniform box priors.
//!
//! Three problems are built in: a deterministic 32x32 circle-outline renderer,
//! the stochastic linear model, and a one-dimensional Gaussian toy model whose
//! error-conditioned posterior is known in closed form.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// A point in parameter space. All entries are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self(values))
        } else {
            Err(Error::NonFinite("parameter vector"))
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(p: ParamVector) -> Self {
        p.0
    }
}

/// Flat simulator output.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation(pub Vec<f64>);

impl Deref for Observation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Uniform prior over an axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Prior {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidPrior("prior needs at least one dimension".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidPrior(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidPrior(format!(
                    "dimension {i}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| hi - lo)
    }

    pub fn midpoint(&self) -> ParamVector {
        ParamVector(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect(),
        )
    }

    /// Inclusive support test; `theta` must have the prior's dimension.
    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn sample(&self, rng: &mut SimRng) -> ParamVector {
        ParamVector(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                .collect(),
        )
    }

    /// `-ln(volume)` inside the box, `-inf` outside.
    pub fn log_density(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        if self.contains(theta) {
            Ok(-self.widths().map(f64::ln).sum::<f64>())
        } else {
            Ok(f64::NEG_INFINITY)
        }
    }
}

/// A generative model `p(x | theta)` that can be sampled but not evaluated.
pub trait Simulator: Sync {
    fn param_dim(&self) -> usize;

    fn observation_len(&self) -> usize;

    fn simulate(&self, theta: &[f64], rng: &mut SimRng) -> Result<Observation>;
}

fn check_box(theta: &[f64], lower: &[f64], upper: &[f64], what: &str) -> Result<()> {
    if theta.len() != lower.len() {
        return Err(Error::DimensionMismatch {
            expected: lower.len(),
            got: theta.len(),
        });
    }
    for (i, v) in theta.iter().enumerate() {
        if !v.is_finite() || *v < lower[i] || *v > upper[i] {
            return Err(Error::OutOfRange(format!(
                "{what} parameter {i} = {v} outside [{}, {}]",
                lower[i], upper[i]
            )));
        }
    }
    Ok(())
}

pub const CIRCLE_SIDE: usize = 32;

/// Renders a one-pixel-thick circle outline on a 32x32 grid over `[-1, 1]^2`.
///
/// Pixel `(row, col)` is lit when its center lies within half a pixel width
/// (1/32) of the circle. Images are flattened row-major with row 0 at the
/// bottom (`y = -1`).
#[derive(Debug, Clone, Copy, Default)]
pub struct CircleSimulator;

impl CircleSimulator {
    const LOWER: [f64; 3] = [-1.0, -1.0, 0.0];
    const UPPER: [f64; 3] = [1.0, 1.0, 1.0];

    /// Center coordinate of pixel index `k`, computed as `(2k - 31) / 32` so
    /// that mirrored indices give exactly negated coordinates.
    pub fn pixel_center(k: usize) -> f64 {
        (2.0 * k as f64 - (CIRCLE_SIDE as f64 - 1.0)) / CIRCLE_SIDE as f64
    }

    pub fn render(&self, theta: &[f64]) -> Result<Observation> {
        check_box(theta, &Self::LOWER, &Self::UPPER, "circle")?;
        let (cx, cy, r) = (theta[0], theta[1], theta[2]);
        let half_width = 1.0 / CIRCLE_SIDE as f64;
        let mut pixels = Vec::with_capacity(CIRCLE_SIDE * CIRCLE_SIDE);
        for row in 0..CIRCLE_SIDE {
            let dy = Self::pixel_center(row) - cy;
            for col in 0..CIRCLE_SIDE {
                let dx = Self::pixel_center(col) - cx;
                let dist = (dx * dx + dy * dy).sqrt();
                pixels.push(if (dist - r).abs() <= half_width { 1.0 } else { 0.0 });
            }
        }
        Ok(Observation(pixels))
    }
}

impl Simulator for CircleSimulator {
    fn param_dim(&self) -> usize {
        3
    }

    fn observation_len(&self) -> usize {
        CIRCLE_SIDE * CIRCLE_SIDE
    }

    fn simulate(&self, theta: &[f64], _rng: &mut SimRng) -> Result<Observation> {
        self.render(theta)
    }
}

pub const LINEAR_POINTS: usize = 100;

/// `y = m x + b + e1 |f (m x + b)| + 0.05 e2` on 100 equidistant points of `[0, 10]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearSimulator;

impl LinearSimulator {
    const LOWER: [f64; 3] = [-5.0, 0.0, 0.0];
    const UPPER: [f64; 3] = [5.0, 10.0, 10.0];

    pub fn grid_point(k: usize) -> f64 {
        10.0 * k as f64 / (LINEAR_POINTS - 1) as f64
    }

    /// Simulates with an explicit noise source; `noise` is called twice per
    /// grid point, first for the multiplicative term then the additive one.
    pub fn simulate_with_noise(
        &self,
        theta: &[f64],
        mut noise: impl FnMut() -> f64,
    ) -> Result<Observation> {
        check_box(theta, &Self::LOWER, &Self::UPPER, "linear")?;
        let (m, b, f) = (theta[0], theta[1], theta[2]);
        let ys = (0..LINEAR_POINTS)
            .map(|k| {
                let line = m * Self::grid_point(k) + b;
                let e1 = noise();
                let e2 = noise();
                line + e1 * (f * line).abs() + 0.05 * e2
            })
            .collect();
        Ok(Observation(ys))
    }
}

impl Simulator for LinearSimulator {
    fn param_dim(&self) -> usize {
        3
    }

    fn observation_len(&self) -> usize {
        LINEAR_POINTS
    }

    fn simulate(&self, theta: &[f64], rng: &mut SimRng) -> Result<Observation> {
        self.simulate_with_noise(theta, || rng.sample(StandardNormal))
    }
}

/// `x ~ Normal(theta, 1)` with `theta` in `[-10, 10]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToySimulator;

impl ToySimulator {
    const LOWER: [f64; 1] = [-10.0];
    const UPPER: [f64; 1] = [10.0];
}

impl Simulator for ToySimulator {
    fn param_dim(&self) -> usize {
        1
    }

    fn observation_len(&self) -> usize {
        1
    }

    fn simulate(&self, theta: &[f64], rng: &mut SimRng) -> Result<Observation> {
        check_box(theta, &Self::LOWER, &Self::UPPER, "toy")?;
        let z: f64 = rng.sample(StandardNormal);
        Ok(Observation(vec![theta[0] + z]))
    }
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Unnormalized error-conditioned posterior of the toy model.
///
/// For `x ~ Normal(theta, 1)` the error `eps = |x - x_o|` is folded-normal, so
/// `p(eps | theta) = phi(eps - (theta - x_o)) + phi(eps + (theta - x_o))`.
/// Multiplied by the flat prior this is zero outside the support.
pub fn toy_error_posterior(theta: f64, eps: f64, x_o: f64, prior: &Prior) -> f64 {
    if !prior.contains(&[theta]) {
        return 0.0;
    }
    let shift = theta - x_o;
    std_normal_pdf(eps - shift) + std_normal_pdf(eps + shift)
}

/// The built-in benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Circle,
    Linear,
    Toy,
}

impl Problem {
    pub const ALL: [Problem; 3] = [Problem::Circle, Problem::Linear, Problem::Toy];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Circle => "circle",
            Problem::Linear => "linear",
            Problem::Toy => "toy",
        }
    }

    pub fn prior(self) -> Prior {
        let (lower, upper) = match self {
            Problem::Circle => (CircleSimulator::LOWER.to_vec(), CircleSimulator::UPPER.to_vec()),
            Problem::Linear => (LinearSimulator::LOWER.to_vec(), LinearSimulator::UPPER.to_vec()),
            Problem::Toy => (ToySimulator::LOWER.to_vec(), ToySimulator::UPPER.to_vec()),
        };
        Prior::new(lower, upper).expect("built-in priors are valid")
    }

    /// The parameter that generates the reference observation.
    pub fn theta_star(self) -> ParamVector {
        match self {
            Problem::Circle => ParamVector(vec![0.0, 0.0, 0.5]),
            Problem::Linear => ParamVector(vec![-0.9594, 4.294, 0.534]),
            Problem::Toy => ParamVector(vec![0.0]),
        }
    }

    /// Default rejection-ABC acceptance threshold (raw error units).
    pub fn default_abc_threshold(self) -> f64 {
        match self {
            Problem::Circle => 100.0,
            Problem::Linear => 200.0,
            Problem::Toy => 0.1,
        }
    }

    pub fn simulator(self) -> &'static dyn Simulator {
        match self {
            Problem::Circle => &CircleSimulator,
            Problem::Linear => &LinearSimulator,
            Problem::Toy => &ToySimulator,
        }
    }
}

impl Simulator for Problem {
    fn param_dim(&self) -> usize {
        self.simulator().param_dim()
    }

    fn observation_len(&self) -> usize {
        self.simulator().observation_len()
    }

    fn simulate(&self, theta: &[f64], rng: &mut SimRng) -> Result<Observation> {
        self.simulator().simulate(theta, rng)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Problem::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown problem `{s}` (expected circle, linear or toy)")))
    }
}
