//! Episodic environments behind one contract, plus episode generation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::policy::{FeatureMap, GibbsPolicy};
use crate::types::EpisodeTrace;

pub mod chain;
pub mod option;
pub mod portfolio;
pub mod stopping;

pub use chain::{chain_mdp, ChainFeatures, ChainMdp, ChainOutcome, ChainSpec, ChainState};
pub use option::{AmericanOption, OptionFeatures, OptionParams};
pub use portfolio::{Portfolio, PortfolioFeatures, PortfolioParams, PortfolioState, Tranche};
pub use stopping::{OptimalStopping, StoppingFeatures, StoppingParams};

/// Result of one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<S> {
    pub next: S,
    pub reward: f64,
    pub terminal: bool,
}

/// An episodic MDP whose episodes end at a terminal (recurrent) state within
/// `horizon()` steps.
pub trait Environment {
    type State: Clone;

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn step<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        action: usize,
        rng: &mut R,
    ) -> Result<Step<Self::State>>;

    fn num_actions(&self, state: &Self::State) -> usize;

    /// Maximum episode length τ.
    fn horizon(&self) -> usize;

    /// Declared bound on the absolute value of a single reward.
    fn reward_bound(&self) -> f64;
}

/// Environments whose initial and transition distributions can be listed
/// exactly, for the oracle.
pub trait EnumerableEnvironment: Environment {
    fn initial_states(&self) -> Vec<(f64, Self::State)>;

    fn outcomes(&self, state: &Self::State, action: usize) -> Result<Vec<(f64, Step<Self::State>)>>;
}

/// Rolls out one episode under π_θ, recording rewards and per-step scores.
///
/// Environment transitions and action draws come from separate streams.
pub fn generate_episode<E, F, R1, R2>(
    env: &E,
    policy: &GibbsPolicy<F>,
    theta: &[f64],
    env_rng: &mut R1,
    policy_rng: &mut R2,
) -> Result<EpisodeTrace>
where
    E: Environment,
    F: FeatureMap<E::State>,
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let dim = policy.feature_map().dim();
    let horizon = env.horizon();
    let mut rewards = Vec::with_capacity(horizon);
    let mut scores = Vec::with_capacity(horizon);
    let mut state = env.reset(env_rng);
    loop {
        if rewards.len() >= horizon {
            return Err(Error::Consistency(format!(
                "episode did not terminate within the horizon of {horizon} steps"
            )));
        }
        let probs = policy.action_probabilities(theta, &state)?;
        let action = crate::policy::inverse_cdf(&probs, policy_rng.gen::<f64>());
        scores.push(policy.score_with_probs(&probs, &state, action)?);
        let step = env.step(&state, action, env_rng)?;
        rewards.push(step.reward);
        if step.terminal {
            break;
        }
        state = step.next;
    }
    EpisodeTrace::new(rewards, scores, dim)
}

/// Rolls out one episode without computing scores; returns R.
pub fn episode_return<E, F, R1, R2>(
    env: &E,
    policy: &GibbsPolicy<F>,
    theta: &[f64],
    env_rng: &mut R1,
    policy_rng: &mut R2,
) -> Result<f64>
where
    E: Environment,
    F: FeatureMap<E::State>,
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let horizon = env.horizon();
    let mut total = 0.0;
    let mut state = env.reset(env_rng);
    for _ in 0..horizon {
        let probs = policy.action_probabilities(theta, &state)?;
        let action = crate::policy::inverse_cdf(&probs, policy_rng.gen::<f64>());
        let step = env.step(&state, action, env_rng)?;
        total += step.reward;
        if step.terminal {
            return Ok(total);
        }
        state = step.next;
    }
    Err(Error::Consistency(format!(
        "episode did not terminate within the horizon of {horizon} steps"
    )))
}

/// Up (w.p. `p`) or down multiplicative price move from one uniform draw.
pub(crate) fn lattice_move<R: Rng + ?Sized>(x: f64, f_u: f64, f_d: f64, p: f64, rng: &mut R) -> f64 {
    if rng.gen::<f64>() < p {
        x * f_u
    } else {
        x * f_d
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")))
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}
