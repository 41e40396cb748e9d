//! Mean-variance objective, its Fenchel-dual surrogate, and the
//! single-trajectory block-gradient estimators.
//!
//! With J = E[R] and M = E[R²], the mean-variance objective
//! J − λ(M − J² − ζ) is an increasing affine function of
//! F_λ = (J + 1/(2λ))² − M. Writing the square through
//! z² = max_y (2zy − y²) turns F_λ into a maximum over an auxiliary scalar y
//! of the surrogate 2y(J + 1/(2λ)) − y² − M, whose gradients in y and θ are
//! both linear in expectations and therefore estimable from one episode.
//!
//! The plain gradient ∇J − λ(∇M − 2J∇J) contains the product J∇J, which no
//! single trajectory estimates without bias; it is only computed exactly, by
//! the oracle.

use serde::{Deserialize, Serialize};

/// First and second moments of the return and their policy gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMoments {
    /// J(θ) = E[R]
    pub j: f64,
    /// M(θ) = E[R²]
    pub m: f64,
    pub grad_j: Vec<f64>,
    pub grad_m: Vec<f64>,
}

impl ReturnMoments {
    /// Moments without gradient information.
    pub fn scalar(j: f64, m: f64) -> Self {
        Self {
            j,
            m,
            grad_j: Vec::new(),
            grad_m: Vec::new(),
        }
    }

    pub fn variance(&self) -> f64 {
        self.m - self.j * self.j
    }
}

/// J − λ(M − J² − ζ).
pub fn mean_variance_objective(mom: &ReturnMoments, lambda: f64, zeta: f64) -> f64 {
    mom.j - lambda * (mom.m - mom.j * mom.j - zeta)
}

/// F_λ = (J + 1/(2λ))² − M.
pub fn f_lambda(mom: &ReturnMoments, lambda: f64) -> f64 {
    let z = mom.j + 1.0 / (2.0 * lambda);
    z * z - mom.m
}

/// 2zy − y², whose maximum over y is z² (attained at y = z).
pub fn fenchel_dual_value(z: f64, y: f64) -> f64 {
    2.0 * z * y - y * y
}

/// f̂_λ(θ, y) = 2y(J + 1/(2λ)) − y² − M.
pub fn surrogate_value(mom: &ReturnMoments, y: f64, lambda: f64) -> f64 {
    fenchel_dual_value(mom.j + 1.0 / (2.0 * lambda), y) - mom.m
}

/// y* = J + 1/(2λ), the maximiser of the surrogate in y.
pub fn optimal_dual(mom: &ReturnMoments, lambda: f64) -> f64 {
    mom.j + 1.0 / (2.0 * lambda)
}

/// g̃^y = 2R + 1/λ − 2y.
pub fn sample_dual_gradient(ret: f64, y: f64, lambda: f64) -> f64 {
    2.0 * ret + 1.0 / lambda - 2.0 * y
}

/// g̃^θ = (2·y_used·R − R²)·ω.
///
/// Which y is passed is the caller's decision: the cyclic update passes the
/// freshly updated dual, the randomized and joint updates pass the old one.
pub fn sample_policy_gradient(ret: f64, y_used: f64, omega: &[f64]) -> Vec<f64> {
    let c = policy_gradient_factor(ret, y_used);
    omega.iter().map(|w| c * w).collect()
}

/// Scalar multiplier 2yR − R² of ω in [`sample_policy_gradient`].
pub fn policy_gradient_factor(ret: f64, y_used: f64) -> f64 {
    2.0 * y_used * ret - ret * ret
}

/// Exact block gradient in y: 2J + 1/λ − 2y.
pub fn dual_gradient(mom: &ReturnMoments, y: f64, lambda: f64) -> f64 {
    2.0 * mom.j + 1.0 / lambda - 2.0 * y
}

/// Exact block gradient in θ: 2y∇J − ∇M.
pub fn policy_gradient(mom: &ReturnMoments, y: f64) -> Vec<f64> {
    mom.grad_j
        .iter()
        .zip(&mom.grad_m)
        .map(|(gj, gm)| 2.0 * y * gj - gm)
        .collect()
}
