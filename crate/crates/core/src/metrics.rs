//! Return-distribution statistics: mean, sample standard deviation, lower-tail
//! CVaR and an equal-width histogram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvarEntry {
    pub alpha: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges spanning [min, max].
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub variance: f64,
    pub cvar: Vec<CvarEntry>,
    pub histogram: Histogram,
}

impl ReturnStats {
    pub fn cvar_at(&self, alpha: f64) -> Option<f64> {
        self.cvar.iter().find(|c| c.alpha == alpha).map(|c| c.value)
    }
}

/// Number of worst outcomes averaged by CVaR_α: ⌈α·n⌉, at least 1.
///
/// A relative slack of 1e-9 keeps products such as 0.07·100 =
/// 7.000000000000001 from rounding up to the next integer.
pub fn tail_count(alpha: f64, n: usize) -> usize {
    let raw = alpha * n as f64;
    ((raw - 1e-9 * raw.max(1.0)).ceil() as usize).clamp(1, n)
}

/// Mean of the ⌈α·n⌉ lowest values of an ascending-sorted slice.
pub fn cvar_sorted(sorted: &[f64], alpha: f64) -> f64 {
    let k = tail_count(alpha, sorted.len());
    sorted[..k].iter().sum::<f64>() / k as f64
}

pub fn summarize(returns: &[f64], alphas: &[f64], bins: usize) -> Result<ReturnStats> {
    let n = returns.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(Error::Config(format!("CVaR level must lie in (0, 1], got {a}")));
    }
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let mut sorted = returns.to_vec();
    sorted.sort_by(f64::total_cmp);

    // sorted order makes the sums independent of input permutation
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let variance = sorted.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64;
    let std = variance.sqrt();

    let cvar = alphas
        .iter()
        .map(|&alpha| CvarEntry {
            alpha,
            value: if alpha == 1.0 { mean } else { cvar_sorted(&sorted, alpha) },
        })
        .collect();

    Ok(ReturnStats {
        n,
        mean,
        std,
        variance: std * std,
        cvar,
        histogram: histogram(&sorted, bins),
    })
}

fn histogram(sorted: &[f64], bins: usize) -> Histogram {
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0u64; bins];
    for &r in sorted {
        let idx = if width > 0.0 {
            (((r - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    Histogram { edges, counts }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_sample() {
        let s = summarize(&[1.0, 2.0, 3.0], &[], 3).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
        assert_eq!(s.histogram.counts.iter().sum::<u64>(), 3);
    }

    #[test]
    fn cvar_half() {
        let s = summarize(&[4.0, 2.0, 1.0, 3.0], &[0.5], 2).unwrap();
        assert_eq!(s.cvar_at(0.5), Some(1.5));
    }

    #[test]
    fn constant_sequence() {
        let s = summarize(&[5.0, 5.0, 5.0], &[0.05, 0.5, 1.0], 4).unwrap();
        assert_eq!(s.std, 0.0);
        for c in &s.cvar {
            assert_eq!(c.value, 5.0);
        }
        assert_eq!(s.histogram.counts, vec![3, 0, 0, 0]);
    }

    #[test]
    fn cvar_one_is_mean() {
        let r = [0.3, -1.0, 2.5, 0.1, 7.0];
        let s = summarize(&r, &[1.0], 5).unwrap();
        assert_eq!(s.cvar_at(1.0), Some(s.mean));
    }

    #[test]
    fn tail_count_is_robust_to_rounding() {
        assert_eq!(tail_count(0.07, 100), 7);
        assert_eq!(tail_count(0.05, 10_000), 500);
        assert_eq!(tail_count(0.5, 4), 2);
        assert_eq!(tail_count(0.01, 3), 1);
        assert_eq!(tail_count(0.34, 3), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            summarize(&[1.0], &[], 1),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
        assert!(summarize(&[1.0, 2.0], &[0.0], 1).is_err());
        assert!(summarize(&[1.0, 2.0], &[], 0).is_err());
    }

    #[test]
    fn histogram_edges_span_range() {
        let s = summarize(&[0.0, 1.0, 2.0, 3.0, 4.0], &[], 4).unwrap();
        assert_eq!(s.histogram.edges, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.histogram.counts, vec![1, 1, 1, 2]);
    }
}
