//! Test-only oracles and helpers.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

/// Tabulated CDF of an unnormalized density on `[a, b]` by cumulative
/// trapezoid quadrature on `n` intervals.
pub struct QuadratureCdf {
    a: f64,
    h: f64,
    cumulative: Vec<f64>,
}

impl QuadratureCdf {
    pub fn new(density: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        let mut cumulative = vec![0.0];
        let mut prev = density(a);
        for i in 1..=n {
            let cur = density(a + i as f64 * h);
            let last = *cumulative.last().unwrap();
            cumulative.push(last + 0.5 * h * (prev + cur));
            prev = cur;
        }
        let total = *cumulative.last().unwrap();
        cumulative.iter_mut().for_each(|c| *c /= total);
        Self { a, h, cumulative }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let pos = (x - self.a) / self.h;
        if pos <= 0.0 {
            return 0.0;
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.cumulative.len() {
            return 1.0;
        }
        let frac = pos - i as f64;
        self.cumulative[i] + frac * (self.cumulative[i + 1] - self.cumulative[i])
    }

    /// Inverse CDF by bisection over the table.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cumulative.partition_point(|&c| c < u).clamp(1, self.cumulative.len() - 1);
        let (lo, hi) = (self.cumulative[i - 1], self.cumulative[i]);
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.0 };
        self.a + (i as f64 - 1.0 + frac) * self.h
    }
}

pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * f(a) + inner + 0.5 * f(b))
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `p(eps | theta)` of `|x - x_o|` with `x ~ N(theta, 1)`.
pub fn folded_normal_pdf(eps: f64, mu: f64) -> f64 {
    if eps < 0.0 {
        return 0.0;
    }
    std_normal_pdf(eps - mu) + std_normal_pdf(eps + mu)
}

/// `E|x|` for `x ~ N(mu, 1)`, by quadrature of the folded density.
pub fn folded_normal_mean(mu: f64) -> f64 {
    trapezoid(|e| e * folded_normal_pdf(e, mu), 0.0, mu.abs() + 12.0, 4000)
}

pub fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

pub fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
