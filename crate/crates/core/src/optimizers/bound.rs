//! Finite-sample bound on the expected squared gradient norm of the
//! reported iterate under constant stepsizes.

use serde::{Deserialize, Serialize};

use crate::config::check_stepsize_condition;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub lipschitz: f64,
    pub grad_bound: f64,
    pub variance_bound: f64,
    pub bias_const: f64,
    pub beta_max: f64,
    pub beta_min: f64,
    pub n_episodes: u64,
    pub f_gap: f64,
    #[serde(default = "default_blocks")]
    pub blocks: u32,
}

fn default_blocks() -> u32 {
    2
}

impl BoundInputs {
    /// Two blocks with a single constant stepsize β for both.
    pub fn constant_step(lipschitz: f64, grad_bound: f64, variance_bound: f64, bias_const: f64, beta: f64, n_episodes: u64, f_gap: f64) -> Self {
        Self {
            lipschitz,
            grad_bound,
            variance_bound,
            bias_const,
            beta_max: beta,
            beta_min: beta,
            n_episodes,
            f_gap,
            blocks: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("grad_bound", self.grad_bound),
            ("variance_bound", self.variance_bound),
            ("bias_const", self.bias_const),
            ("f_gap", self.f_gap),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        let positive = [
            ("lipschitz", self.lipschitz),
            ("beta_max", self.beta_max),
            ("beta_min", self.beta_min),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if self.beta_min > self.beta_max {
            return Err(Error::Config(format!(
                "beta_min {} exceeds beta_max {}",
                self.beta_min, self.beta_max
            )));
        }
        if self.n_episodes == 0 {
            return Err(Error::Config("n_episodes must be at least 1".into()));
        }
        if self.blocks == 0 {
            return Err(Error::Config("blocks must be at least 1".into()));
        }
        check_stepsize_condition(1, self.beta_min, self.beta_max, self.lipschitz)
    }
}

/// The per-step noise constant C. Two blocks use the mean-variance specific
/// constant; any other block count uses the generic block-coordinate one.
pub fn bound_constant(b: &BoundInputs) -> f64 {
    let (l, g, s, a, beta) = (b.lipschitz, b.grad_bound, b.variance_bound, b.bias_const, b.beta_max);
    let (g2, s2) = (g * g, s * s);
    let shrink = 1.0 - 0.5 * l * beta;
    if b.blocks == 2 {
        shrink * (l * l * beta * (g2 + s2) + l * (2.0 * g2 + s2))
            + a * g
            + l * s2
            + 2.0 * l * (1.0 + l * beta) * (3.0 * s2 + 2.0 * g2)
    } else {
        let blocks = f64::from(b.blocks);
        let cross: f64 = (0..b.blocks).map(|i| l * (f64::from(i) * (g2 + s2)).sqrt()).sum();
        shrink * cross + blocks * (a * g + 0.5 * l * s2)
    }
}

/// (f_gap + N β_max² C) / (N (β_min − (L/2) β_max²)).
pub fn finite_sample_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    let n = b.n_episodes as f64;
    let numer = b.f_gap + n * b.beta_max * b.beta_max * bound_constant(b);
    let denom = n * (b.beta_min - 0.5 * b.lipschitz * b.beta_max * b.beta_max);
    Ok(numer / denom)
}
