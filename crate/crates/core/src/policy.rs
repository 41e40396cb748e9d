//! Gibbs (softmax) policies over linear features.
//!
//! π_θ(a|s) ∝ exp(θ·φ(s,a)/T). The score has the closed form
//! (φ(s,a) − Σ_b π_θ(b|s) φ(s,b)) / T.

use rand::Rng;

use crate::error::{Error, Result};

/// State-action features φ(s, a) ∈ ℝ^d together with the feasible action
/// count of each state (actions are `0..num_actions(s)`).
pub trait FeatureMap<S> {
    fn dim(&self) -> usize;

    fn num_actions(&self, state: &S) -> usize;

    /// Writes φ(state, action) into `out` (length `dim()`).
    fn write_features(&self, state: &S, action: usize, out: &mut [f64]);

    fn features(&self, state: &S, action: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.write_features(state, action, &mut out);
        out
    }
}

impl<S, F: FeatureMap<S> + ?Sized> FeatureMap<S> for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn num_actions(&self, state: &S) -> usize {
        (**self).num_actions(state)
    }

    fn write_features(&self, state: &S, action: usize, out: &mut [f64]) {
        (**self).write_features(state, action, out)
    }
}

/// Places a base feature vector into the block belonging to the chosen
/// action, leaving every other block zero: φ(s, a) = e_a ⊗ ψ(s).
pub fn write_action_block(base: &[f64], action: usize, num_actions: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), base.len() * num_actions);
    out.fill(0.0);
    let start = action * base.len();
    out[start..start + base.len()].copy_from_slice(base);
}

#[derive(Debug, Clone)]
pub struct GibbsPolicy<F> {
    features: F,
    temperature: f64,
}

impl<F> GibbsPolicy<F> {
    pub fn new(features: F) -> Self {
        Self {
            features,
            temperature: 1.0,
        }
    }

    pub fn with_temperature(features: F, temperature: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::Config(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        Ok(Self {
            features,
            temperature,
        })
    }

    pub fn feature_map(&self) -> &F {
        &self.features
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

impl<F> GibbsPolicy<F> {
    pub fn dim<S>(&self) -> usize
    where
        F: FeatureMap<S>,
    {
        self.features.dim()
    }

    /// Logits θ·φ(s,a)/T for every feasible action.
    pub fn logits<S>(&self, theta: &[f64], state: &S) -> Result<Vec<f64>>
    where
        F: FeatureMap<S>,
    {
        let n = self.features.num_actions(state);
        if n == 0 {
            return Err(Error::NoActions);
        }
        let d = self.features.dim();
        if theta.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: theta.len(),
            });
        }
        let mut phi = vec![0.0; d];
        Ok((0..n)
            .map(|a| {
                self.features.write_features(state, a, &mut phi);
                dot(theta, &phi) / self.temperature
            })
            .collect())
    }

    pub fn action_probabilities<S>(&self, theta: &[f64], state: &S) -> Result<Vec<f64>>
    where
        F: FeatureMap<S>,
    {
        Ok(softmax(&self.logits(theta, state)?))
    }

    /// ln π_θ(a|s).
    pub fn log_prob<S>(&self, theta: &[f64], state: &S, action: usize) -> Result<f64>
    where
        F: FeatureMap<S>,
    {
        let logits = self.logits(theta, state)?;
        if action >= logits.len() {
            return Err(Error::InfeasibleAction {
                action,
                available: logits.len(),
            });
        }
        Ok(logits[action] - log_sum_exp(&logits))
    }

    /// ∇_θ ln π_θ(a|s).
    pub fn score<S>(&self, theta: &[f64], state: &S, action: usize) -> Result<Vec<f64>>
    where
        F: FeatureMap<S>,
    {
        let probs = self.action_probabilities(theta, state)?;
        self.score_with_probs(&probs, state, action)
    }

    /// Score given already-computed action probabilities for `state`.
    pub fn score_with_probs<S>(&self, probs: &[f64], state: &S, action: usize) -> Result<Vec<f64>>
    where
        F: FeatureMap<S>,
    {
        if action >= probs.len() {
            return Err(Error::InfeasibleAction {
                action,
                available: probs.len(),
            });
        }
        let d = self.features.dim();
        let mut phi = vec![0.0; d];
        let mut score = self.features.features(state, action);
        for (b, &p) in probs.iter().enumerate() {
            self.features.write_features(state, b, &mut phi);
            for (s, f) in score.iter_mut().zip(&phi) {
                *s -= p * f;
            }
        }
        for s in score.iter_mut() {
            *s /= self.temperature;
        }
        Ok(score)
    }

    /// Draws an action by inverse CDF on a single uniform draw.
    pub fn sample_action<S, R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        state: &S,
        rng: &mut R,
    ) -> Result<usize>
    where
        F: FeatureMap<S>,
    {
        let probs = self.action_probabilities(theta, state)?;
        Ok(inverse_cdf(&probs, rng.gen::<f64>()))
    }
}

/// Index of the first action whose cumulative probability exceeds `u`.
pub fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the final partial sum
    probs.len() - 1
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = out.iter().sum();
    for p in out.iter_mut() {
        *p /= z;
    }
    out
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One state, features given explicitly per action.
    struct Table(Vec<Vec<f64>>);

    impl FeatureMap<()> for Table {
        fn dim(&self) -> usize {
            self.0.first().map_or(0, Vec::len)
        }
        fn num_actions(&self, _: &()) -> usize {
            self.0.len()
        }
        fn write_features(&self, _: &(), a: usize, out: &mut [f64]) {
            out.copy_from_slice(&self.0[a]);
        }
    }

    fn two_arm() -> GibbsPolicy<Table> {
        GibbsPolicy::new(Table(vec![vec![1.0, 0.0], vec![0.0, 1.0]]))
    }

    #[test]
    fn symmetric_logits_give_uniform() {
        let p = two_arm().action_probabilities(&[0.0, 0.0], &()).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn ln2_logit_gives_two_thirds() {
        let p = two_arm()
            .action_probabilities(&[2f64.ln(), 0.0], &())
            .unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_action_is_certain_with_zero_score() {
        let pol = GibbsPolicy::new(Table(vec![vec![3.0, -1.0]]));
        assert_eq!(pol.action_probabilities(&[0.4, 0.2], &()).unwrap(), vec![1.0]);
        assert_eq!(pol.score(&[0.4, 0.2], &(), 0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn empty_action_set_errors() {
        let pol = GibbsPolicy::new(Table(vec![]));
        assert_eq!(pol.action_probabilities(&[], &()), Err(Error::NoActions));
    }

    #[test]
    fn score_is_feature_minus_mean() {
        let s = two_arm().score(&[0.0, 0.0], &(), 0).unwrap();
        assert_eq!(s, vec![0.5, -0.5]);
    }

    #[test]
    fn infeasible_action_errors() {
        assert!(matches!(
            two_arm().score(&[0.0, 0.0], &(), 2),
            Err(Error::InfeasibleAction { action: 2, available: 2 })
        ));
    }

    #[test]
    fn inverse_cdf_picks_first_bucket() {
        assert_eq!(inverse_cdf(&[0.5, 0.5], 0.25), 0);
        assert_eq!(inverse_cdf(&[0.5, 0.5], 0.75), 1);
        assert_eq!(inverse_cdf(&[1.0], 0.999), 0);
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let p = two_arm().action_probabilities(&[1000.0, 999.0], &()).unwrap();
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn temperature_scales_score() {
        let pol = GibbsPolicy::with_temperature(Table(vec![vec![1.0, 0.0], vec![0.0, 1.0]]), 2.0)
            .unwrap();
        assert_eq!(pol.score(&[0.0, 0.0], &(), 0).unwrap(), vec![0.25, -0.25]);
        assert!(GibbsPolicy::with_temperature(Table(vec![]), 0.0).is_err());
    }
}
