//! American-style put+call option on a binomial price lattice.
//!
//! State (x_k, k). Executing pays g(x) = max(0, w_put − x) + max(0, x − w_call)
//! and ends the episode; holding pays nothing and moves the price by f_u
//! (w.p. p) or f_d. Holding at k = τ − 1 ends the episode at maturity with
//! payoff g(x_τ).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_positive, check_probability, lattice_move, EnumerableEnvironment, Environment, Step};
use crate::error::{Error, Result};
use crate::policy::{write_action_block, FeatureMap};

pub const HOLD: usize = 0;
pub const EXECUTE: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionParams {
    #[serde(alias = "K_put")]
    pub w_put: f64,
    #[serde(alias = "K_call")]
    pub w_call: f64,
    pub x0: f64,
    pub f_u: f64,
    pub f_d: f64,
    pub p: f64,
    pub tau: usize,
}

impl Default for OptionParams {
    fn default() -> Self {
        Self {
            w_put: 1.0,
            w_call: 1.5,
            x0: 1.25,
            f_u: 9.0 / 8.0,
            f_d: 8.0 / 9.0,
            p: 0.45,
            tau: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionState {
    pub price: f64,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct AmericanOption {
    params: OptionParams,
}

impl AmericanOption {
    pub fn new(params: OptionParams) -> Result<Self> {
        check_positive("x0", params.x0)?;
        check_positive("f_u", params.f_u)?;
        check_positive("f_d", params.f_d)?;
        check_probability("p", params.p)?;
        if params.tau == 0 {
            return Err(Error::Config("tau must be at least 1".into()));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &OptionParams {
        &self.params
    }

    /// Exercise payoff g(x).
    pub fn payoff(&self, x: f64) -> f64 {
        (self.params.w_put - x).max(0.0) + (x - self.params.w_call).max(0.0)
    }

    pub fn default_features(&self) -> OptionFeatures {
        OptionFeatures {
            params: self.params.clone(),
        }
    }

    fn hold_to(&self, state: &OptionState, price: f64) -> Step<OptionState> {
        let k = state.k + 1;
        let next = OptionState { price, k };
        if k >= self.params.tau {
            Step {
                next,
                reward: self.payoff(price),
                terminal: true,
            }
        } else {
            Step {
                next,
                reward: 0.0,
                terminal: false,
            }
        }
    }

    fn execute(&self, state: &OptionState) -> Step<OptionState> {
        Step {
            next: *state,
            reward: self.payoff(state.price),
            terminal: true,
        }
    }

    fn check_action(action: usize) -> Result<()> {
        if action > EXECUTE {
            return Err(Error::InfeasibleAction {
                action,
                available: 2,
            });
        }
        Ok(())
    }
}

/// Free-function form of one transition.
pub fn option_step<R: Rng + ?Sized>(
    env: &AmericanOption,
    state: &OptionState,
    action: usize,
    rng: &mut R,
) -> Result<Step<OptionState>> {
    env.step(state, action, rng)
}

impl Environment for AmericanOption {
    type State = OptionState;

    fn reset<R: Rng + ?Sized>(&self, _rng: &mut R) -> OptionState {
        OptionState {
            price: self.params.x0,
            k: 0,
        }
    }

    fn step<R: Rng + ?Sized>(&self, state: &OptionState, action: usize, rng: &mut R) -> Result<Step<OptionState>> {
        Self::check_action(action)?;
        if action == EXECUTE {
            return Ok(self.execute(state));
        }
        let p = &self.params;
        let price = lattice_move(state.price, p.f_u, p.f_d, p.p, rng);
        Ok(self.hold_to(state, price))
    }

    fn num_actions(&self, _state: &OptionState) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.params.tau
    }

    fn reward_bound(&self) -> f64 {
        let p = &self.params;
        let top = p.x0 * p.f_u.max(p.f_d).max(1.0).powi(p.tau as i32);
        p.w_put.max(top - p.w_call)
    }
}

impl EnumerableEnvironment for AmericanOption {
    fn initial_states(&self) -> Vec<(f64, OptionState)> {
        vec![(
            1.0,
            OptionState {
                price: self.params.x0,
                k: 0,
            },
        )]
    }

    fn outcomes(&self, state: &OptionState, action: usize) -> Result<Vec<(f64, Step<OptionState>)>> {
        Self::check_action(action)?;
        if action == EXECUTE {
            return Ok(vec![(1.0, self.execute(state))]);
        }
        let p = &self.params;
        Ok(vec![
            (p.p, self.hold_to(state, state.price * p.f_u)),
            (1.0 - p.p, self.hold_to(state, state.price * p.f_d)),
        ])
    }
}

/// ψ(s) = (1, x_k/x0 − 1, k/τ, g(x_k)) placed in the block of the chosen action.
/// The price enters relative to its starting value, which spans the same
/// linear policy class as the raw price.
#[derive(Debug, Clone)]
pub struct OptionFeatures {
    params: OptionParams,
}

impl OptionFeatures {
    const BASE: usize = 4;
}

impl FeatureMap<OptionState> for OptionFeatures {
    fn dim(&self) -> usize {
        2 * Self::BASE
    }

    fn num_actions(&self, _state: &OptionState) -> usize {
        2
    }

    fn write_features(&self, state: &OptionState, action: usize, out: &mut [f64]) {
        let p = &self.params;
        let g = (p.w_put - state.price).max(0.0) + (state.price - p.w_call).max(0.0);
        let base = [1.0, state.price / p.x0 - 1.0, state.k as f64 / p.tau as f64, g];
        write_action_block(&base, action, 2, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;

    fn env() -> AmericanOption {
        AmericanOption::new(OptionParams::default()).unwrap()
    }

    /// An rng whose first uniform f64 draw is ~0 (always "up").
    fn up() -> StepRng {
        StepRng::new(0, 0)
    }

    /// First uniform draw ~1 (always "down").
    fn down() -> StepRng {
        StepRng::new(u64::MAX, 0)
    }

    #[test]
    fn execute_below_put_strike() {
        let e = env();
        let s = OptionState { price: 0.8, k: 3 };
        let step = option_step(&e, &s, EXECUTE, &mut up()).unwrap();
        assert!((step.reward - 0.2).abs() < 1e-12);
        assert!(step.terminal);
    }

    #[test]
    fn execute_between_strikes_pays_nothing() {
        let e = env();
        let s = e.reset(&mut up());
        let step = e.step(&s, EXECUTE, &mut up()).unwrap();
        assert_eq!(step.reward, 0.0);
        assert!(step.terminal);
    }

    #[test]
    fn hold_up_move() {
        let e = env();
        let s = e.reset(&mut up());
        let step = e.step(&s, HOLD, &mut up()).unwrap();
        assert!((step.next.price - 1.40625).abs() < 1e-12);
        assert_eq!(step.next.k, 1);
        assert_eq!(step.reward, 0.0);
        assert!(!step.terminal);
        let step = e.step(&s, HOLD, &mut down()).unwrap();
        assert!((step.next.price - 1.25 * 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn hold_at_last_step_pays_maturity_payoff() {
        let e = env();
        let s = OptionState { price: 1.6, k: 19 };
        let step = e.step(&s, HOLD, &mut up()).unwrap();
        assert!(step.terminal);
        assert!((step.reward - (1.6 * 9.0 / 8.0 - 1.5)).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_action() {
        let e = env();
        let s = e.reset(&mut up());
        assert!(e.step(&s, 2, &mut up()).is_err());
    }

    #[test]
    fn features_are_action_blocks() {
        let f = env().default_features();
        let s = OptionState { price: 0.8, k: 10 };
        let hold = f.features(&s, HOLD);
        let exec = f.features(&s, EXECUTE);
        assert_eq!(&hold[4..], &[0.0; 4]);
        assert_eq!(&exec[..4], &[0.0; 4]);
        assert_eq!(hold[0], 1.0);
        assert!((hold[1] - (0.8 / 1.25 - 1.0)).abs() < 1e-15);
        assert_eq!(hold[2], 0.5);
        assert!((hold[3] - 0.2).abs() < 1e-12);
    }
}
