//! Single-episode parameter updates.

use serde::{Deserialize, Serialize};

use crate::config::RiskConfig;
use crate::error::Result;
use crate::objective::{policy_gradient_factor, sample_dual_gradient};
use crate::types::{EpisodeTrace, Iterate};

/// Auxiliary running estimates kept by the two-time-scale baseline.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aux {
    pub j_hat: f64,
    pub m_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub iterate: Iterate,
    /// Episodes processed so far; the next episode has index `t + 1`.
    pub t: u64,
    pub aux: Aux,
}

impl OptimizerState {
    pub fn new(iterate: Iterate) -> Self {
        Self {
            iterate,
            t: 0,
            aux: Aux::default(),
        }
    }

    fn advance(&self, iterate: Iterate, aux: Aux) -> Result<Self> {
        let t = self.t + 1;
        Ok(Self {
            iterate: iterate.check_finite(t)?,
            t,
            aux,
        })
    }
}

/// Receives the intermediate values of an update, in order.
pub trait UpdateObserver {
    fn dual_updated(&mut self, _before: f64, _after: f64) {}
    /// `y_used` is the dual value that multiplied R in the θ update.
    fn policy_updated(&mut self, _y_used: f64) {}
}

pub struct NoopObserver;

impl UpdateObserver for NoopObserver {}

fn axpy(theta: &[f64], c: f64, omega: &[f64]) -> Vec<f64> {
    theta.iter().zip(omega).map(|(t, w)| t + c * w).collect()
}

pub fn mvp_step(state: &OptimizerState, trace: &EpisodeTrace, cfg: &RiskConfig) -> Result<OptimizerState> {
    mvp_step_observed(state, trace, cfg, &mut NoopObserver)
}

/// y_{t+1} = y_t + β^y (2R + 1/λ − 2y_t), then
/// θ_{t+1} = θ_t + β^θ (2 y_{t+1} R − R²) ω.
pub fn mvp_step_observed(
    state: &OptimizerState,
    trace: &EpisodeTrace,
    cfg: &RiskConfig,
    obs: &mut dyn UpdateObserver,
) -> Result<OptimizerState> {
    let t = state.t + 1;
    let r = trace.return_total();
    let y_old = state.iterate.y;
    let y_new = y_old + cfg.y_schedule().at(t) * sample_dual_gradient(r, y_old, cfg.lambda());
    obs.dual_updated(y_old, y_new);
    let c = cfg.theta_schedule().at(t) * policy_gradient_factor(r, y_new);
    obs.policy_updated(y_new);
    let theta = axpy(&state.iterate.theta, c, &trace.omega());
    state.advance(Iterate::new(theta, y_new), state.aux)
}

/// Which block a randomized update touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Dual,
    Policy,
}

/// Maps a uniform draw on [0, 1) to a block with probabilities (0.5, 0.5).
pub fn select_block(draw: f64) -> Block {
    if draw < 0.5 {
        Block::Dual
    } else {
        Block::Policy
    }
}

pub fn rcpg_step(state: &OptimizerState, trace: &EpisodeTrace, cfg: &RiskConfig, block_draw: f64) -> Result<OptimizerState> {
    rcpg_step_observed(state, trace, cfg, block_draw, &mut NoopObserver)
}

/// Updates exactly one block; the θ update uses the old y.
pub fn rcpg_step_observed(
    state: &OptimizerState,
    trace: &EpisodeTrace,
    cfg: &RiskConfig,
    block_draw: f64,
    obs: &mut dyn UpdateObserver,
) -> Result<OptimizerState> {
    let t = state.t + 1;
    let r = trace.return_total();
    let y = state.iterate.y;
    let next = match select_block(block_draw) {
        Block::Dual => {
            let y_new = y + cfg.y_schedule().at(t) * sample_dual_gradient(r, y, cfg.lambda());
            obs.dual_updated(y, y_new);
            Iterate::new(state.iterate.theta.clone(), y_new)
        }
        Block::Policy => {
            let c = cfg.theta_schedule().at(t) * policy_gradient_factor(r, y);
            obs.policy_updated(y);
            Iterate::new(axpy(&state.iterate.theta, c, &trace.omega()), y)
        }
    };
    state.advance(next, state.aux)
}

pub fn sga_step(state: &OptimizerState, trace: &EpisodeTrace, cfg: &RiskConfig) -> Result<OptimizerState> {
    sga_step_observed(state, trace, cfg, &mut NoopObserver)
}

/// Joint update of both blocks from the old iterate.
pub fn sga_step_observed(
    state: &OptimizerState,
    trace: &EpisodeTrace,
    cfg: &RiskConfig,
    obs: &mut dyn UpdateObserver,
) -> Result<OptimizerState> {
    let t = state.t + 1;
    let r = trace.return_total();
    let y = state.iterate.y;
    let y_new = y + cfg.y_schedule().at(t) * sample_dual_gradient(r, y, cfg.lambda());
    obs.dual_updated(y, y_new);
    let c = cfg.theta_schedule().at(t) * policy_gradient_factor(r, y);
    obs.policy_updated(y);
    let theta = axpy(&state.iterate.theta, c, &trace.omega());
    state.advance(Iterate::new(theta, y_new), state.aux)
}

/// θ += β R ω; y is carried along untouched.
pub fn vanilla_pg_step(state: &OptimizerState, trace: &EpisodeTrace, beta: f64) -> Result<OptimizerState> {
    let c = beta * trace.return_total();
    let theta = axpy(&state.iterate.theta, c, &trace.omega());
    state.advance(Iterate::new(theta, state.iterate.y), state.aux)
}

/// Two-time-scale baseline: track Ĵ and M̂ on the fast scale, then move θ
/// along (R − λ(R² − 2ĴR))ω on the slow scale.
pub fn tamar_step(
    state: &OptimizerState,
    trace: &EpisodeTrace,
    fast_beta: f64,
    slow_beta: f64,
    lambda: f64,
) -> Result<OptimizerState> {
    let r = trace.return_total();
    let j_hat = state.aux.j_hat + fast_beta * (r - state.aux.j_hat);
    let m_hat = state.aux.m_hat + fast_beta * (r * r - state.aux.m_hat);
    let c = slow_beta * (r - lambda * (r * r - 2.0 * j_hat * r));
    let theta = axpy(&state.iterate.theta, c, &trace.omega());
    state.advance(Iterate::new(theta, state.iterate.y), Aux { j_hat, m_hat })
}
