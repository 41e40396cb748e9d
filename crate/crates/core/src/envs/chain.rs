//! Small tabular MDPs given by explicit outcome tables, small enough for the
//! oracle to enumerate every trajectory.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EnumerableEnvironment, Environment, Step};
use crate::error::{Error, Result};
use crate::policy::FeatureMap;

pub const MAX_STATES: usize = 10;
pub const MAX_ACTIONS: usize = 4;
pub const MAX_HORIZON: usize = 8;

/// One possible result of taking an action: probability, successor (absent
/// means the terminal state), and reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainOutcome {
    pub prob: f64,
    #[serde(default)]
    pub next: Option<usize>,
    pub reward: f64,
}

impl ChainOutcome {
    pub fn to(prob: f64, next: usize, reward: f64) -> Self {
        Self {
            prob,
            next: Some(next),
            reward,
        }
    }

    pub fn terminal(prob: f64, reward: f64) -> Self {
        Self {
            prob,
            next: None,
            reward,
        }
    }
}

/// `table[s][a]` lists the outcomes of action `a` in state `s`; states may
/// have different numbers of actions. Reaching `horizon` steps ends the
/// episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub initial: Vec<f64>,
    pub table: Vec<Vec<Vec<ChainOutcome>>>,
    pub horizon: usize,
}

impl ChainSpec {
    /// One state, two arms: arm 0 pays 1, arm 1 pays 0 or 2 with equal
    /// probability. Equal means, variances 0 and 1.
    pub fn equal_mean_bandit() -> Self {
        Self {
            initial: vec![1.0],
            table: vec![vec![
                vec![ChainOutcome::terminal(1.0, 1.0)],
                vec![
                    ChainOutcome::terminal(0.5, 0.0),
                    ChainOutcome::terminal(0.5, 2.0),
                ],
            ]],
            horizon: 1,
        }
    }

    /// Three states, two actions each, horizon 4, with stochastic
    /// transitions, stochastic rewards and self-loops.
    pub fn three_state_chain() -> Self {
        use ChainOutcome as O;
        Self {
            initial: vec![0.6, 0.4, 0.0],
            table: vec![
                vec![
                    vec![O::to(0.7, 1, 1.0), O::to(0.3, 2, 0.0)],
                    vec![O::to(0.5, 0, 0.5), O::terminal(0.5, 2.0)],
                ],
                vec![
                    vec![O::to(1.0, 2, -1.0)],
                    vec![O::to(0.4, 0, 0.3), O::terminal(0.6, 1.5)],
                ],
                vec![
                    vec![O::terminal(0.5, 0.0), O::to(0.5, 1, 1.0)],
                    vec![O::to(1.0, 0, 0.2)],
                ],
            ],
            horizon: 4,
        }
    }

    /// Deterministic chain 0 → 1 → … → terminal with reward 1 per step.
    pub fn deterministic_chain(steps: usize) -> Self {
        let table = (0..steps)
            .map(|s| {
                let out = if s + 1 < steps {
                    ChainOutcome::to(1.0, s + 1, 1.0)
                } else {
                    ChainOutcome::terminal(1.0, 1.0)
                };
                vec![vec![out]]
            })
            .collect();
        let mut initial = vec![0.0; steps];
        initial[0] = 1.0;
        Self {
            initial,
            table,
            horizon: steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainState {
    pub s: usize,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct ChainMdp {
    spec: ChainSpec,
    max_actions: usize,
    reward_bound: f64,
}

/// Validates a spec and builds the environment.
pub fn chain_mdp(spec: ChainSpec) -> Result<ChainMdp> {
    let n = spec.table.len();
    if n == 0 || n > MAX_STATES {
        return Err(Error::EnvSpec(format!(
            "state count must be in 1..={MAX_STATES}, got {n}"
        )));
    }
    if spec.horizon == 0 || spec.horizon > MAX_HORIZON {
        return Err(Error::EnvSpec(format!(
            "horizon must be in 1..={MAX_HORIZON}, got {}",
            spec.horizon
        )));
    }
    if spec.initial.len() != n {
        return Err(Error::EnvSpec(format!(
            "initial distribution has {} entries for {n} states",
            spec.initial.len()
        )));
    }
    check_distribution("initial distribution", spec.initial.iter().copied())?;
    let mut max_actions = 0;
    let mut reward_bound: f64 = 0.0;
    for (s, actions) in spec.table.iter().enumerate() {
        if actions.is_empty() || actions.len() > MAX_ACTIONS {
            return Err(Error::EnvSpec(format!(
                "state {s} must have 1..={MAX_ACTIONS} actions, has {}",
                actions.len()
            )));
        }
        max_actions = max_actions.max(actions.len());
        for (a, outcomes) in actions.iter().enumerate() {
            if outcomes.is_empty() {
                return Err(Error::EnvSpec(format!("state {s} action {a} has no outcomes")));
            }
            check_distribution(
                &format!("transition row ({s}, {a})"),
                outcomes.iter().map(|o| o.prob),
            )?;
            for o in outcomes {
                if let Some(next) = o.next {
                    if next >= n {
                        return Err(Error::EnvSpec(format!(
                            "state {s} action {a} leads to unknown state {next}"
                        )));
                    }
                }
                if !o.reward.is_finite() {
                    return Err(Error::EnvSpec(format!("non-finite reward in ({s}, {a})")));
                }
                reward_bound = reward_bound.max(o.reward.abs());
            }
        }
    }
    Ok(ChainMdp {
        spec,
        max_actions,
        reward_bound,
    })
}

fn check_distribution(what: &str, probs: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    for p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::EnvSpec(format!("{what} has probability {p} outside [0, 1]")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::EnvSpec(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

impl ChainMdp {
    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn num_states(&self) -> usize {
        self.spec.table.len()
    }

    /// Tabular one-hot features over (state, action).
    pub fn default_features(&self) -> ChainFeatures {
        ChainFeatures {
            actions: self.spec.table.iter().map(Vec::len).collect(),
            max_actions: self.max_actions,
        }
    }

    fn realise(&self, state: &ChainState, o: &ChainOutcome) -> Step<ChainState> {
        let k = state.k + 1;
        match o.next {
            Some(s) => Step {
                next: ChainState { s, k },
                reward: o.reward,
                terminal: k >= self.spec.horizon,
            },
            None => Step {
                next: ChainState { s: state.s, k },
                reward: o.reward,
                terminal: true,
            },
        }
    }

    fn row(&self, state: &ChainState, action: usize) -> Result<&[ChainOutcome]> {
        let actions = &self.spec.table[state.s];
        actions
            .get(action)
            .map(Vec::as_slice)
            .ok_or(Error::InfeasibleAction {
                action,
                available: actions.len(),
            })
    }
}

fn sample_index<R: Rng + ?Sized>(probs: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let u = rng.gen::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

impl Environment for ChainMdp {
    type State = ChainState;

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> ChainState {
        let s = sample_index(self.spec.initial.iter().copied(), rng);
        ChainState { s, k: 0 }
    }

    fn step<R: Rng + ?Sized>(&self, state: &ChainState, action: usize, rng: &mut R) -> Result<Step<ChainState>> {
        let row = self.row(state, action)?;
        let i = sample_index(row.iter().map(|o| o.prob), rng);
        Ok(self.realise(state, &row[i]))
    }

    fn num_actions(&self, state: &ChainState) -> usize {
        self.spec.table[state.s].len()
    }

    fn horizon(&self) -> usize {
        self.spec.horizon
    }

    fn reward_bound(&self) -> f64 {
        self.reward_bound
    }
}

impl EnumerableEnvironment for ChainMdp {
    fn initial_states(&self) -> Vec<(f64, ChainState)> {
        self.spec
            .initial
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, &p)| (p, ChainState { s, k: 0 }))
            .collect()
    }

    fn outcomes(&self, state: &ChainState, action: usize) -> Result<Vec<(f64, Step<ChainState>)>> {
        Ok(self
            .row(state, action)?
            .iter()
            .filter(|o| o.prob > 0.0)
            .map(|o| (o.prob, self.realise(state, o)))
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct ChainFeatures {
    actions: Vec<usize>,
    max_actions: usize,
}

impl FeatureMap<ChainState> for ChainFeatures {
    fn dim(&self) -> usize {
        self.actions.len() * self.max_actions
    }

    fn num_actions(&self, state: &ChainState) -> usize {
        self.actions[state.s]
    }

    fn write_features(&self, state: &ChainState, action: usize, out: &mut [f64]) {
        out.fill(0.0);
        out[state.s * self.max_actions + action] = 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;

    #[test]
    fn builtin_specs_are_valid() {
        chain_mdp(ChainSpec::equal_mean_bandit()).unwrap();
        chain_mdp(ChainSpec::three_state_chain()).unwrap();
        chain_mdp(ChainSpec::deterministic_chain(2)).unwrap();
    }

    #[test]
    fn rejects_unnormalised_rows() {
        let mut spec = ChainSpec::equal_mean_bandit();
        spec.table[0][1][0].prob = 0.4;
        assert!(matches!(chain_mdp(spec), Err(Error::EnvSpec(_))));
    }

    #[test]
    fn rejects_oversized_specs() {
        let mut spec = ChainSpec::deterministic_chain(2);
        spec.horizon = 9;
        assert!(chain_mdp(spec).is_err());
        let spec = ChainSpec::deterministic_chain(11);
        assert!(chain_mdp(spec).is_err());
    }

    #[test]
    fn deterministic_chain_pays_one_per_step() {
        let env = chain_mdp(ChainSpec::deterministic_chain(2)).unwrap();
        let mut rng = StepRng::new(0, 0);
        let s = env.reset(&mut rng);
        let a = env.step(&s, 0, &mut rng).unwrap();
        assert!(!a.terminal);
        let b = env.step(&a.next, 0, &mut rng).unwrap();
        assert!(b.terminal);
        assert_eq!(a.reward + b.reward, 2.0);
    }

    #[test]
    fn horizon_truncates() {
        let spec = ChainSpec {
            initial: vec![1.0],
            table: vec![vec![vec![ChainOutcome::to(1.0, 0, 1.0)]]],
            horizon: 3,
        };
        let env = chain_mdp(spec).unwrap();
        let mut rng = StepRng::new(0, 0);
        let mut s = env.reset(&mut rng);
        for k in 0..3 {
            let step = env.step(&s, 0, &mut rng).unwrap();
            assert_eq!(step.terminal, k == 2);
            s = step.next;
        }
    }

    #[test]
    fn tabular_features() {
        let env = chain_mdp(ChainSpec::three_state_chain()).unwrap();
        let f = env.default_features();
        assert_eq!(f.dim(), 6);
        let phi = f.features(&ChainState { s: 2, k: 0 }, 1);
        assert_eq!(phi, vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }
}
