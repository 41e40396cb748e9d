//! The outer training loop.

use rand::Rng;
use serde::Serialize;

use super::output::select_output;
use super::steps::{mvp_step, rcpg_step, sga_step, tamar_step, vanilla_pg_step, OptimizerState};
use super::Algorithm;
use crate::config::RiskConfig;
use crate::envs::{generate_episode, Environment};
use crate::error::{Error, Result};
use crate::policy::{FeatureMap, GibbsPolicy};
use crate::rng::{stream, Stream};
use crate::types::Iterate;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// θ snapshot stride; `None` picks max(1, N/10000).
    pub snapshot_stride: Option<u64>,
    /// Starting iterate; zeros when absent.
    pub initial: Option<Iterate>,
}

/// Every y and every `stride`-th θ (plus the last one).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateHistory {
    stride: u64,
    ys: Vec<f64>,
    thetas: Vec<(u64, Vec<f64>)>,
}

impl IterateHistory {
    fn new(stride: u64, capacity: u64) -> Self {
        Self {
            stride,
            ys: Vec::with_capacity(capacity as usize),
            thetas: Vec::with_capacity((capacity / stride + 1) as usize),
        }
    }

    fn push(&mut self, t: u64, it: &Iterate, last: bool) {
        self.ys.push(it.y);
        if t.is_multiple_of(self.stride) || last {
            self.thetas.push((t, it.theta.clone()));
        }
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    /// Number of recorded episodes.
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// y_t for t = 1..=N.
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Kept (t, θ_t) pairs in increasing t.
    pub fn thetas(&self) -> &[(u64, Vec<f64>)] {
        &self.thetas
    }

    /// Iterate after episode t when its θ was kept.
    pub fn get(&self, t: u64) -> Option<Iterate> {
        let i = self.thetas.binary_search_by_key(&t, |(k, _)| *k).ok()?;
        let y = *self.ys.get(t.checked_sub(1)? as usize)?;
        Some(Iterate::new(self.thetas[i].1.clone(), y))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainingRun {
    pub algorithm: &'static str,
    /// Training return of each episode.
    pub returns: Vec<f64>,
    pub history: IterateHistory,
    /// 1-based index of the reported iterate.
    pub output_index: u64,
    pub output: Iterate,
    #[serde(skip)]
    pub final_state: OptimizerState,
}

fn default_stride(n: u64) -> u64 {
    (n / 10_000).max(1)
}

/// Trains for `cfg.episodes()` episodes with streams derived from
/// `cfg.seed()`, then picks the reported iterate.
pub fn run<E, F>(
    algorithm: Algorithm,
    env: &E,
    policy: &GibbsPolicy<F>,
    cfg: &RiskConfig,
    opts: &RunOptions,
) -> Result<TrainingRun>
where
    E: Environment,
    F: FeatureMap<E::State>,
{
    let dim = policy.feature_map().dim();
    let initial = opts.initial.clone().unwrap_or_else(|| Iterate::zeros(dim));
    if initial.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: initial.dim(),
        });
    }
    let n = cfg.episodes();
    let option = cfg.output_option();
    let stride = if option.is_random() {
        1
    } else {
        let s = opts.snapshot_stride.unwrap_or_else(|| default_stride(n));
        if s == 0 {
            return Err(Error::Config("snapshot stride must be at least 1".into()));
        }
        s
    };

    let seed = cfg.seed();
    let mut env_rng = stream(seed, Stream::Environment);
    let mut policy_rng = stream(seed, Stream::Policy);
    let mut block_rng = stream(seed, Stream::BlockSelection);
    let mut output_rng = stream(seed, Stream::OutputSelection);

    let mut state = OptimizerState::new(initial);
    let mut returns = Vec::with_capacity(n as usize);
    let mut history = IterateHistory::new(stride, n);
    for t in 1..=n {
        let trace = generate_episode(env, policy, &state.iterate.theta, &mut env_rng, &mut policy_rng)?;
        returns.push(trace.return_total());
        state = match algorithm {
            Algorithm::Mvp => mvp_step(&state, &trace, cfg)?,
            Algorithm::Rcpg => rcpg_step(&state, &trace, cfg, block_rng.gen::<f64>())?,
            Algorithm::Sga => sga_step(&state, &trace, cfg)?,
            Algorithm::VanillaPg => vanilla_pg_step(&state, &trace, cfg.theta_schedule().at(t))?,
            Algorithm::Tamar(ts) => tamar_step(&state, &trace, ts.fast().at(t), ts.slow().at(t), cfg.lambda())?,
        };
        history.push(t, &state.iterate, t == n);
    }

    let output_index = select_output(option, cfg, n, &mut output_rng)?;
    let output = history
        .get(output_index)
        .ok_or_else(|| Error::Consistency(format!("iterate {output_index} was not kept")))?;
    Ok(TrainingRun {
        algorithm: algorithm.name(),
        returns,
        history,
        output_index,
        output,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OutputOption;
    use crate::envs::{chain_mdp, ChainFeatures, ChainSpec};
    use crate::schedule::StepsizeSchedule;

    fn setup(n: u64, option: OutputOption) -> (crate::envs::ChainMdp, GibbsPolicy<ChainFeatures>, RiskConfig) {
        let env = chain_mdp(ChainSpec::equal_mean_bandit()).unwrap();
        let policy = GibbsPolicy::new(env.default_features());
        let s = StepsizeSchedule::constant(0.01).unwrap();
        let cfg = RiskConfig::builder(1.0, s, s).episodes(n).output_option(option).seed(3).build().unwrap();
        (env, policy, cfg)
    }

    #[test]
    fn single_episode_run() {
        let (env, policy, cfg) = setup(1, OutputOption::LastIterate);
        let r = run(Algorithm::Mvp, &env, &policy, &cfg, &RunOptions::default()).unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.output_index, 1);
        assert_eq!(r.output, r.final_state.iterate);
    }

    #[test]
    fn runs_are_reproducible() {
        let (env, policy, cfg) = setup(200, OutputOption::UniformRandomIterate);
        let a = run(Algorithm::Rcpg, &env, &policy, &cfg, &RunOptions::default()).unwrap();
        let b = run(Algorithm::Rcpg, &env, &policy, &cfg, &RunOptions::default()).unwrap();
        assert_eq!(a.returns, b.returns);
        assert_eq!(a.output, b.output);
        assert_eq!(a.history.thetas().len(), 200);
    }

    #[test]
    fn thinning_keeps_last() {
        let (env, policy, cfg) = setup(25, OutputOption::LastIterate);
        let opts = RunOptions {
            snapshot_stride: Some(10),
            initial: None,
        };
        let r = run(Algorithm::Sga, &env, &policy, &cfg, &opts).unwrap();
        let kept: Vec<u64> = r.history.thetas().iter().map(|(t, _)| *t).collect();
        assert_eq!(kept, vec![10, 20, 25]);
        assert_eq!(r.history.ys().len(), 25);
        assert!(r.history.get(11).is_none());
    }

    #[test]
    fn wrong_initial_dimension() {
        let (env, policy, cfg) = setup(5, OutputOption::LastIterate);
        let opts = RunOptions {
            snapshot_stride: None,
            initial: Some(Iterate::zeros(1)),
        };
        assert!(matches!(
            run(Algorithm::Mvp, &env, &policy, &cfg, &opts),
            Err(Error::Dimension { .. })
        ));
    }
}
