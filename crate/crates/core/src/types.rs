//! Episode traces and block iterates shared by every algorithm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One trajectory from reset until the recurrent/terminal state.
///
/// `scores[k]` is the gradient of the log-probability of the action taken at
/// step `k` under the policy that generated the episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    rewards: Vec<f64>,
    scores: Vec<Vec<f64>>,
    return_total: f64,
}

impl EpisodeTrace {
    /// Builds a trace, checking that every step has a reward and a score of
    /// dimension `dim`, and that the episode is not empty.
    pub fn new(rewards: Vec<f64>, scores: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        if rewards.is_empty() {
            return Err(Error::Consistency("episode has no steps".into()));
        }
        if rewards.len() != scores.len() {
            return Err(Error::Consistency(format!(
                "{} rewards but {} score vectors",
                rewards.len(),
                scores.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| s.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: bad.len(),
            });
        }
        let return_total = rewards.iter().sum();
        Ok(Self {
            rewards,
            scores,
            return_total,
        })
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    /// Number of steps τ_t.
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Undiscounted return R_t.
    pub fn return_total(&self) -> f64 {
        self.return_total
    }

    pub fn dim(&self) -> usize {
        self.scores[0].len()
    }

    /// Likelihood-ratio derivative ω_t: the sum of the per-step scores.
    pub fn omega(&self) -> Vec<f64> {
        omega(&self.scores)
    }
}

/// Elementwise sum of per-step score vectors.
pub fn omega(scores: &[Vec<f64>]) -> Vec<f64> {
    let dim = scores.first().map_or(0, Vec::len);
    let mut out = vec![0.0; dim];
    for s in scores {
        for (o, v) in out.iter_mut().zip(s) {
            *o += v;
        }
    }
    out
}

/// The block variable x = (θ, y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub theta: Vec<f64>,
    pub y: f64,
}

impl Iterate {
    pub fn new(theta: Vec<f64>, y: f64) -> Self {
        Self { theta, y }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            theta: vec![0.0; dim],
            y: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.theta.iter().all(|v| v.is_finite())
    }

    /// Returns `self` unchanged if every entry is finite, otherwise a
    /// divergence error stamped with `episode`.
    pub fn check_finite(self, episode: u64) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::Divergence {
                episode,
                detail: format!("non-finite iterate (y={}, theta={:?})", self.y, self.theta),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_sums_unit_vectors() {
        assert_eq!(omega(&[vec![1.0, 0.0], vec![0.0, 1.0]]), vec![1.0, 1.0]);
    }

    #[test]
    fn omega_zero_case() {
        assert_eq!(omega(&[vec![0.0, 0.0]]), vec![0.0, 0.0]);
    }

    #[test]
    fn omega_arithmetic() {
        let scores = vec![vec![2.0, -1.0], vec![-2.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(omega(&scores), vec![1.0, 1.0]);
    }

    #[test]
    fn trace_return_matches_rewards() {
        let t = EpisodeTrace::new(vec![0.1, 0.2, 0.3], vec![vec![0.0]; 3], 1).unwrap();
        assert!((t.return_total() - 0.6).abs() < 1e-12);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn trace_rejects_bad_shapes() {
        assert!(EpisodeTrace::new(vec![], vec![], 1).is_err());
        assert!(EpisodeTrace::new(vec![1.0], vec![], 1).is_err());
        assert!(matches!(
            EpisodeTrace::new(vec![1.0], vec![vec![0.0, 0.0]], 1),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn non_finite_iterate_is_divergence() {
        let it = Iterate::new(vec![f64::NAN], 0.0);
        assert!(matches!(
            it.check_finite(7),
            Err(Error::Divergence { episode: 7, .. })
        ));
    }
}
