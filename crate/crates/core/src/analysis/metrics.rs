// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use serde::Serialize;

use crate::error::{Result, TacoError};

/// Equal-width histogram over `[min, max]`. `bin_edges` has `counts.len() + 1`
/// entries; the maximum lands in the last bin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f32], bins: usize) -> Result<Histogram> {
        if bins == 0 {
            return Err(TacoError::InvalidConfig("histogram needs at least one bin".into()));
        }
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v as f64), hi.max(v as f64))
        });
        let (lo, hi) = if values.is_empty() { (0.0, 0.0) } else { (lo, hi) };
        let width = (hi - lo) / bins as f64;
        let bin_edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let idx = if width > 0.0 {
                (((v as f64 - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[idx] += 1;
        }
        Ok(Histogram { bin_edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(left edge, count)` per bin.
    pub fn rows(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.bin_edges.iter().copied().zip(self.counts.iter().copied())
    }
}

/// Statistics of the elementwise error `e_i = x_i - x̂_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub mse: f64,
    /// `‖e‖ / ‖x‖`; `inf` when `x` is all zero but the error is not.
    pub relative_l2: f64,
    pub max_abs_error: f64,
    /// Share of nonzero inputs reconstructed as exactly 0.
    pub zero_collapse_fraction: f64,
    pub histogram: Histogram,
    /// Excess kurtosis of the error; `None` when the error is constant.
    pub kurtosis: Option<f64>,
}

fn check_lengths(a: &[f32], b: &[f32]) -> Result<()> {
    if a.len() != b.len() {
        return Err(TacoError::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

pub fn mse(x: &[f32], y: &[f32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter()
        .zip(y)
        .map(|(a, b)| (*a as f64 - *b as f64).powi(2))
        .sum::<f64>()
        / x.len() as f64
}

pub fn relative_l2(x: &[f32], y: &[f32]) -> f64 {
    let err: f64 = x.iter().zip(y).map(|(a, b)| (*a as f64 - *b as f64).powi(2)).sum();
    let norm: f64 = x.iter().map(|a| (*a as f64).powi(2)).sum();
    if norm == 0.0 {
        return if err == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (err / norm).sqrt()
}

pub fn max_abs_error(x: &[f32], y: &[f32]) -> f64 {
    x.iter()
        .zip(y)
        .fold(0.0, |m, (a, b)| m.max((*a as f64 - *b as f64).abs()))
}

pub fn zero_collapse_fraction(x: &[f32], y: &[f32]) -> f64 {
    let (nonzero, collapsed) = x.iter().zip(y).fold((0usize, 0usize), |(nz, c), (a, b)| {
        if *a != 0.0 {
            (nz + 1, c + usize::from(*b == 0.0))
        } else {
            (nz, c)
        }
    });
    if nonzero == 0 {
        0.0
    } else {
        collapsed as f64 / nonzero as f64
    }
}

/// Excess kurtosis `m4 / m2^2 - 3` from central sample moments.
pub fn excess_kurtosis(x: &[f32]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mean = x.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (m2, m4) = x.iter().fold((0.0, 0.0), |(m2, m4), &v| {
        let d = v as f64 - mean;
        let d2 = d * d;
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 == 0.0 || !m2.is_finite() {
        return None;
    }
    Some(m4 / (m2 * m2) - 3.0)
}

/// Share of elements with `|x| <= threshold`.
pub fn fraction_within(x: &[f32], threshold: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().filter(|v| (v.abs() as f64) <= threshold).count() as f64 / x.len() as f64
}

pub fn error_report(original: &[f32], reconstructed: &[f32], bins: usize) -> Result<ErrorReport> {
    check_lengths(original, reconstructed)?;
    let errors: Vec<f32> = original.iter().zip(reconstructed).map(|(a, b)| a - b).collect();
    Ok(ErrorReport {
        mse: mse(original, reconstructed),
        relative_l2: relative_l2(original, reconstructed),
        max_abs_error: max_abs_error(original, reconstructed),
        zero_collapse_fraction: zero_collapse_fraction(original, reconstructed),
        histogram: Histogram::new(&errors, bins)?,
        kurtosis: excess_kurtosis(&errors),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionStats {
    pub histogram: Histogram,
    pub excess_kurtosis: Option<f64>,
    /// `(threshold, fraction with |x| <= threshold)`.
    pub fraction_within: Vec<(f64, f64)>,
}

pub fn distribution_stats(x: &[f32], bins: usize, thresholds: &[f64]) -> Result<DistributionStats> {
    if x.len() < 2 {
        return Err(TacoError::InvalidConfig(format!(
            "distribution statistics need at least 2 elements, got {}",
            x.len()
        )));
    }
    Ok(DistributionStats {
        histogram: Histogram::new(x, bins)?,
        excess_kurtosis: excess_kurtosis(x),
        fraction_within: thresholds.iter().map(|&t| (t, fraction_within(x, t))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_buffers() {
        let x = [1.0, -2.0, 0.0, 3.5];
        let r = error_report(&x, &x, 4).unwrap();
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.relative_l2, 0.0);
        assert_eq!(r.zero_collapse_fraction, 0.0);
        assert_eq!(r.max_abs_error, 0.0);
        assert_eq!(r.kurtosis, None);
        assert_eq!(r.histogram.total(), 4);
    }

    #[test]
    fn hand_example() {
        let r = error_report(&[1.0, 1.0], &[0.0, 2.0], 2).unwrap();
        assert_eq!(r.mse, 1.0);
        assert_eq!(r.relative_l2, 1.0);
        assert_eq!(r.max_abs_error, 1.0);
        assert_eq!(r.zero_collapse_fraction, 0.5);
    }

    #[test]
    fn zero_reference() {
        assert_eq!(relative_l2(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(relative_l2(&[0.0, 0.0], &[0.0, 1.0]), f64::INFINITY);
        assert_eq!(zero_collapse_fraction(&[0.0, 0.0], &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            error_report(&[1.0], &[1.0, 2.0], 4),
            Err(TacoError::LengthMismatch { expected: 1, actual: 2 })
        ));
    }

    #[test]
    fn histogram_shape() {
        let h = Histogram::new(&[0.0, 1.0, 2.0, 3.0, 4.0], 4).unwrap();
        assert_eq!(h.bin_edges, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(h.counts, vec![1, 1, 1, 2]);
        let flat = Histogram::new(&[2.0; 10], 3).unwrap();
        assert_eq!(flat.counts, vec![10, 0, 0]);
        assert!(Histogram::new(&[1.0], 0).is_err());
    }

    #[test]
    fn kurtosis_of_known_distributions() {
        // Two-point symmetric distribution: excess kurtosis -2.
        let x: Vec<f32> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((excess_kurtosis(&x).unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(excess_kurtosis(&[3.0; 5]), None);
        let stats = distribution_stats(&[3.0; 5], 8, &[1.0]).unwrap();
        assert_eq!(stats.excess_kurtosis, None);
        assert!(distribution_stats(&[1.0], 8, &[]).is_err());
    }

    #[test]
    fn fraction_within_counts() {
        let x = [0.1, -0.2, 0.5, -1.0];
        assert_eq!(fraction_within(&x, 0.25), 0.5);
        assert_eq!(fraction_within(&x, 1.0), 1.0);
    }
}
