//! Optimal stopping of a cost process.
//!
//! State (x_k, k). Accepting pays the cost x_k and ends the episode; waiting
//! pays the holding cost p_h and moves x by f_u (w.p. p) or f_d. At k = τ the
//! current cost is forced on the buyer. Costs enter as negative rewards.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_positive, check_probability, lattice_move, EnumerableEnvironment, Environment, Step};
use crate::error::{Error, Result};
use crate::policy::{write_action_block, FeatureMap};

pub const WAIT: usize = 0;
pub const ACCEPT: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingParams {
    pub x0: f64,
    pub f_u: f64,
    pub f_d: f64,
    pub p: f64,
    pub tau: usize,
    pub p_h: f64,
}

impl Default for StoppingParams {
    fn default() -> Self {
        Self {
            x0: 1.25,
            f_u: 2.0,
            f_d: 0.5,
            p: 0.65,
            tau: 20,
            p_h: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingState {
    pub cost: f64,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct OptimalStopping {
    params: StoppingParams,
}

impl OptimalStopping {
    pub fn new(params: StoppingParams) -> Result<Self> {
        check_positive("x0", params.x0)?;
        check_positive("f_u", params.f_u)?;
        check_positive("f_d", params.f_d)?;
        check_probability("p", params.p)?;
        if !(params.p_h.is_finite() && params.p_h >= 0.0) {
            return Err(Error::Config(format!(
                "p_h must be nonnegative, got {}",
                params.p_h
            )));
        }
        if params.tau == 0 {
            return Err(Error::Config("tau must be at least 1".into()));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &StoppingParams {
        &self.params
    }

    pub fn default_features(&self) -> StoppingFeatures {
        StoppingFeatures {
            params: self.params.clone(),
        }
    }

    fn accept(&self, state: &StoppingState) -> Step<StoppingState> {
        Step {
            next: *state,
            reward: -state.cost,
            terminal: true,
        }
    }

    // Waiting at k = τ − 1 reaches k = τ, where the new cost is forced; the
    // holding cost and the forced cost are paid in the same step so episodes
    // never exceed τ steps.
    fn wait_to(&self, state: &StoppingState, cost: f64) -> Step<StoppingState> {
        let k = state.k + 1;
        let next = StoppingState { cost, k };
        if k >= self.params.tau {
            Step {
                next,
                reward: -self.params.p_h - cost,
                terminal: true,
            }
        } else {
            Step {
                next,
                reward: -self.params.p_h,
                terminal: false,
            }
        }
    }

    fn check_action(action: usize) -> Result<()> {
        if action > ACCEPT {
            return Err(Error::InfeasibleAction {
                action,
                available: 2,
            });
        }
        Ok(())
    }
}

pub fn stopping_step<R: Rng + ?Sized>(
    env: &OptimalStopping,
    state: &StoppingState,
    action: usize,
    rng: &mut R,
) -> Result<Step<StoppingState>> {
    env.step(state, action, rng)
}

impl Environment for OptimalStopping {
    type State = StoppingState;

    fn reset<R: Rng + ?Sized>(&self, _rng: &mut R) -> StoppingState {
        StoppingState {
            cost: self.params.x0,
            k: 0,
        }
    }

    fn step<R: Rng + ?Sized>(&self, state: &StoppingState, action: usize, rng: &mut R) -> Result<Step<StoppingState>> {
        Self::check_action(action)?;
        if action == ACCEPT || state.k >= self.params.tau {
            return Ok(self.accept(state));
        }
        let p = &self.params;
        let cost = lattice_move(state.cost, p.f_u, p.f_d, p.p, rng);
        Ok(self.wait_to(state, cost))
    }

    fn num_actions(&self, _state: &StoppingState) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.params.tau
    }

    fn reward_bound(&self) -> f64 {
        let p = &self.params;
        p.x0 * p.f_u.max(p.f_d).max(1.0).powi(p.tau as i32) + p.tau as f64 * p.p_h
    }
}

impl EnumerableEnvironment for OptimalStopping {
    fn initial_states(&self) -> Vec<(f64, StoppingState)> {
        vec![(
            1.0,
            StoppingState {
                cost: self.params.x0,
                k: 0,
            },
        )]
    }

    fn outcomes(&self, state: &StoppingState, action: usize) -> Result<Vec<(f64, Step<StoppingState>)>> {
        Self::check_action(action)?;
        if action == ACCEPT || state.k >= self.params.tau {
            return Ok(vec![(1.0, self.accept(state))]);
        }
        let p = &self.params;
        Ok(vec![
            (p.p, self.wait_to(state, state.cost * p.f_u)),
            (1.0 - p.p, self.wait_to(state, state.cost * p.f_d)),
        ])
    }
}

/// ψ(s) = (1, ln(x_k/x0), k/τ, −ln(1 + x_k)) in the block of the chosen
/// action. Costs grow geometrically, so both cost-dependent entries are
/// log-compressed.
#[derive(Debug, Clone)]
pub struct StoppingFeatures {
    params: StoppingParams,
}

impl FeatureMap<StoppingState> for StoppingFeatures {
    fn dim(&self) -> usize {
        8
    }

    fn num_actions(&self, _state: &StoppingState) -> usize {
        2
    }

    fn write_features(&self, state: &StoppingState, action: usize, out: &mut [f64]) {
        let p = &self.params;
        let base = [
            1.0,
            (state.cost / p.x0).ln(),
            state.k as f64 / p.tau as f64,
            -(1.0 + state.cost).ln(),
        ];
        write_action_block(&base, action, 2, out);
    }
}
