//! Test-only oracles, independent of the code paths they check.
#![allow(dead_code)]

/// Composite trapezoid rule with `n` intervals.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * f(a) + inner + 0.5 * f(b))
}

/// Tabulated CDF of an unnormalized density on `[a, b]`, built by
/// cumulative trapezoid quadrature on `n` intervals.
pub struct QuadratureCdf {
    a: f64,
    h: f64,
    cumulative: Vec<f64>,
}

impl QuadratureCdf {
    pub fn new(density: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut prev = density(a);
        for i in 1..=n {
            let cur = density(a + i as f64 * h);
            let last = *cumulative.last().unwrap();
            cumulative.push(last + 0.5 * h * (prev + cur));
            prev = cur;
        }
        let total = *cumulative.last().unwrap();
        for c in &mut cumulative {
            *c /= total;
        }
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
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h))
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

/// Standard normal CDF by Simpson quadrature of the density from -12.
pub fn normal_cdf_by_quadrature(z: f64) -> f64 {
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if z < -12.0 {
        return 0.0;
    }
    simpson(phi, -12.0, z, 20_000)
}

/// Central finite difference of `f` at `x` along coordinate `i`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[i] += h;
    down[i] -= h;
    (f(&up) - f(&down)) / (2.0 * h)
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}
