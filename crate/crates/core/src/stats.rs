//! Summary statistics and goodness-of-fit helpers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n(x) - F(x)|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS statistic against `Uniform(lower, upper)`.
pub fn ks_uniform(samples: &[f64], lower: f64, upper: f64) -> f64 {
    ks_statistic(samples, |x| ((x - lower) / (upper - lower)).clamp(0.0, 1.0))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); zero for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Nearest-rank quantile of sorted data: element `ceil(p n)` (1-based).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Equal-width bin counts over `[lower, upper]`; values equal to `upper`
/// land in the last bin and values outside the range are dropped.
pub fn histogram(values: &[f64], lower: f64, upper: f64, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    let width = (upper - lower) / bins as f64;
    for &v in values {
        if !(lower..=upper).contains(&v) {
            continue;
        }
        let k = if width > 0.0 { ((v - lower) / width) as usize } else { 0 };
        counts[k.min(bins - 1)] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub mean: f64,
    pub std: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl MarginalSummary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("cannot summarize an empty sample".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            mean: mean(values),
            std: std_dev(values),
            q05: quantile_sorted(&sorted, 0.05),
            q50: quantile_sorted(&sorted, 0.50),
            q95: quantile_sorted(&sorted, 0.95),
        })
    }
}

/// Per-dimension summary of retained posterior samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub dims: Vec<MarginalSummary>,
    pub acceptance_rate: Option<f64>,
    pub samples: usize,
}

impl PosteriorSummary {
    pub fn from_states<'a>(
        states: impl IntoIterator<Item = &'a [f64]>,
        acceptance_rate: Option<f64>,
    ) -> Result<Self> {
        let mut columns: Vec<Vec<f64>> = Vec::new();
        let mut samples = 0;
        for s in states {
            if columns.is_empty() {
                columns = vec![Vec::new(); s.len()];
            }
            if s.len() != columns.len() {
                return Err(Error::DimensionMismatch {
                    expected: columns.len(),
                    got: s.len(),
                });
            }
            for (c, v) in columns.iter_mut().zip(s) {
                c.push(*v);
            }
            samples += 1;
        }
        if samples == 0 {
            return Err(Error::InvalidConfig("cannot summarize an empty chain".into()));
        }
        let dims = columns.iter().map(|c| MarginalSummary::of(c)).collect::<Result<_>>()?;
        Ok(Self {
            dims,
            acceptance_rate,
            samples,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_779_5).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.158_655_253_931_457_07).abs() < 1e-12);
    }

    #[test]
    fn ks_of_perfect_grid_is_half_step() {
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_uniform(&xs, 0.0, 1.0) - 0.5 / n as f64).abs() < 1e-12);
        assert_eq!(ks_uniform(&[2.0, 2.0], 0.0, 1.0), 1.0);
    }

    #[test]
    fn nearest_rank_quantiles() {
        let sorted: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(quantile_sorted(&sorted, 0.05), 1.0);
        assert_eq!(quantile_sorted(&sorted, 0.5), 5.0);
        assert_eq!(quantile_sorted(&sorted, 0.95), 10.0);
        assert_eq!(quantile_sorted(&sorted, 0.0), 1.0);
        let s = MarginalSummary::of(&[3.0, 1.0, 2.0, 5.0, 4.0]).unwrap();
        assert_eq!((s.q05, s.q50, s.q95), (1.0, 3.0, 5.0));
        assert_eq!(s.mean, 3.0);
        assert!((s.std - 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[0.0, 0.5, 1.0, 1.5, -0.1], 0.0, 1.0, 4);
        assert_eq!(h, vec![1, 0, 1, 1]);
        assert_eq!(histogram(&[0.3; 5], 0.3, 0.3, 3), vec![5, 0, 0]);
    }

    #[test]
    fn summary_needs_samples() {
        let empty: Vec<&[f64]> = Vec::new();
        assert!(PosteriorSummary::from_states(empty, None).is_err());
        let s = PosteriorSummary::from_states([&[1.0, 2.0][..], &[3.0, 4.0][..]], Some(0.5)).unwrap();
        assert_eq!(s.dims[1].mean, 3.0);
        assert_eq!(s.samples, 2);
    }
}
