//! Histogram images and summary tables.

use std::fmt::Write as _;

use eglf_core::stats::{histogram, MarginalSummary};
use serde::{Deserialize, Serialize};

use eglf_core::Result;

/// Height of histogram images in pixels.
pub const IMAGE_HEIGHT: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub column: String,
    pub lower: f64,
    pub upper: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bins spanning the observed range of `values`.
    pub fn of(column: &str, values: &[f64], bins: usize) -> Self {
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            column: column.to_string(),
            lower,
            upper,
            counts: histogram(values, lower, upper, bins),
        }
    }

    /// Binary 8-bit PGM with one pixel column per bin; bars are white and
    /// scaled so the fullest bin spans the image height.
    pub fn to_pgm(&self, height: usize) -> Vec<u8> {
        let width = self.counts.len();
        let max = self.counts.iter().copied().max().unwrap_or(0).max(1);
        let bars: Vec<usize> = self
            .counts
            .iter()
            .map(|&c| {
                let h = (c as f64 / max as f64 * height as f64).round() as usize;
                if c > 0 { h.max(1) } else { 0 }
            })
            .collect();
        let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
        for row in 0..height {
            out.extend(bars.iter().map(|&b| if row >= height - b { 255 } else { 0 }));
        }
        out
    }
}

/// One row per column: `column,samples,mean,std,q05,q50,q95`.
pub fn summary_csv(columns: &[(String, Vec<f64>)]) -> Result<String> {
    let mut out = String::from("column,samples,mean,std,q05,q50,q95\n");
    for (name, values) in columns {
        let s = MarginalSummary::of(values)?;
        writeln!(out, "{name},{},{},{},{},{},{}", values.len(), s.mean, s.std, s.q05, s.q50, s.q95)
            .expect("writing to a String");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_layout() {
        let h = Histogram {
            column: "x".into(),
            lower: 0.0,
            upper: 1.0,
            counts: vec![0, 2, 4],
        };
        let img = h.to_pgm(4);
        let header = b"P5\n3 4\n255\n";
        assert_eq!(&img[..header.len()], header);
        let pixels = &img[header.len()..];
        assert_eq!(pixels.len(), 12);
        assert_eq!(pixels, &[0, 0, 255, 0, 0, 255, 0, 255, 255, 0, 255, 255]);
    }

    #[test]
    fn single_value_fills_one_bin() {
        let h = Histogram::of("x", &[0.3; 10], 64);
        assert_eq!(h.counts[0], 10);
        assert_eq!(h.counts.iter().sum::<u64>(), 10);
    }

    #[test]
    fn summary_rows() {
        let csv = summary_csv(&[("a".into(), vec![1.0, 2.0, 3.0])]).unwrap();
        assert_eq!(csv, "column,samples,mean,std,q05,q50,q95\na,3,2,1,1,2,3\n");
    }
}
