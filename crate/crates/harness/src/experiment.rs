//! Grid execution: train each (λ, seed) cell, then evaluate its output
//! policy on a fresh batch with θ frozen.

use std::time::Instant;

use mvpg::envs::{
    chain_mdp, episode_return, AmericanOption, Environment, OptimalStopping, Portfolio,
};
use mvpg::metrics::{summarize, ReturnStats};
use mvpg::optimizers::{run, RunOptions};
use mvpg::policy::{FeatureMap, GibbsPolicy};
use mvpg::rng::{stream, Stream};
use mvpg::Iterate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EnvName, ExperimentConfig};
use crate::error::{HarnessError, Result};

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "MVPG_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub env: String,
    pub algo: String,
    pub lambda: f64,
    pub seed: u64,
    pub episodes: u64,
    pub status: RunStatus,
    #[serde(default)]
    pub error: Option<String>,
    /// Training returns averaged over consecutive windows of `curve_window`.
    pub curve_window: u64,
    pub train_curve: Vec<f64>,
    pub output_index: Option<u64>,
    pub output: Option<Iterate>,
    pub eval: Option<ReturnStats>,
    pub wall_ms: u64,
}

impl RunResult {
    pub fn eval_mean(&self) -> Option<f64> {
        self.eval.as_ref().map(|s| s.mean)
    }

    pub fn eval_std(&self) -> Option<f64> {
        self.eval.as_ref().map(|s| s.std)
    }

    pub fn eval_cvar(&self, alpha: f64) -> Option<f64> {
        self.eval.as_ref().and_then(|s| s.cvar_at(alpha))
    }
}

/// Per-λ aggregate over seeds that finished.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub env: String,
    pub algo: String,
    pub lambda: f64,
    pub runs: usize,
    pub diverged: usize,
    /// Averages of the per-seed evaluation statistics.
    pub eval_mean: Option<f64>,
    pub eval_std: Option<f64>,
    pub eval_cvar_05: Option<f64>,
    /// Spread of the per-seed evaluation means.
    pub seed_mean_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResults {
    pub fn any_diverged(&self) -> bool {
        self.runs.iter().any(|r| r.status == RunStatus::Diverged)
    }
}

/// The λ value recorded for a run; vanilla PG has none and records 0.
fn recorded_lambda(cfg: &ExperimentConfig, lambda: f64) -> f64 {
    if cfg.algorithm.uses_lambda() {
        lambda
    } else {
        0.0
    }
}

fn window_means(returns: &[f64], window: u64) -> Vec<f64> {
    returns
        .chunks(window as usize)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Evaluates θ on `episodes` fresh episodes from the evaluation streams of
/// `seed`. No learning happens here.
pub fn evaluate<E, F>(
    env: &E,
    policy: &GibbsPolicy<F>,
    theta: &[f64],
    episodes: usize,
    seed: u64,
    alphas: &[f64],
    bins: usize,
) -> mvpg::Result<ReturnStats>
where
    E: Environment,
    F: FeatureMap<E::State>,
{
    let mut env_rng = stream(seed, Stream::EvalEnvironment);
    let mut policy_rng = stream(seed, Stream::EvalPolicy);
    let returns = (0..episodes)
        .map(|_| episode_return(env, policy, theta, &mut env_rng, &mut policy_rng))
        .collect::<mvpg::Result<Vec<f64>>>()?;
    summarize(&returns, alphas, bins)
}

fn run_cell<E, F>(cfg: &ExperimentConfig, env: &E, policy: &GibbsPolicy<F>, lambda: f64, seed: u64) -> Result<RunResult>
where
    E: Environment,
    F: FeatureMap<E::State>,
{
    let start = Instant::now();
    let risk = cfg.risk_config(lambda, seed)?;
    let algorithm = cfg.algorithm()?;
    let opts = RunOptions {
        snapshot_stride: cfg.snapshot_stride,
        initial: None,
    };
    let window = cfg.curve_window();
    let mut result = RunResult {
        env: cfg.environment.as_str().into(),
        algo: cfg.algorithm.as_str().into(),
        lambda: recorded_lambda(cfg, lambda),
        seed,
        episodes: cfg.episodes,
        status: RunStatus::Ok,
        error: None,
        curve_window: window,
        train_curve: Vec::new(),
        output_index: None,
        output: None,
        eval: None,
        wall_ms: 0,
    };
    match run(algorithm, env, policy, &risk, &opts) {
        Ok(train) => {
            let eval = evaluate(
                env,
                policy,
                &train.output.theta,
                cfg.eval_episodes,
                seed,
                &cfg.cvar_alphas,
                cfg.histogram_bins,
            )?;
            result.train_curve = window_means(&train.returns, window);
            result.output_index = Some(train.output_index);
            result.output = Some(train.output);
            result.eval = Some(eval);
        }
        Err(e @ mvpg::Error::Divergence { .. }) => {
            result.status = RunStatus::Diverged;
            result.error = Some(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    if cfg.record_timing {
        result.wall_ms = start.elapsed().as_millis() as u64;
    }
    Ok(result)
}

fn run_grid<E, F>(cfg: &ExperimentConfig, env: &E, policy: &GibbsPolicy<F>) -> Result<Vec<RunResult>>
where
    E: Environment + Sync,
    F: FeatureMap<E::State> + Sync,
{
    let cells: Vec<(f64, u64)> = cfg
        .effective_lambdas()
        .into_iter()
        .flat_map(|l| cfg.seeds.iter().map(move |&s| (l, s)))
        .collect();
    let work = || {
        cells
            .par_iter()
            .map(|&(l, s)| run_cell(cfg, env, policy, l, s))
            .collect::<Result<Vec<_>>>()
    };
    match worker_count()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(work),
        None => work(),
    }
}

fn worker_count() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// One row per λ, in grid order.
pub fn summarize_runs(cfg: &ExperimentConfig, runs: &[RunResult]) -> Vec<SummaryRow> {
    cfg.effective_lambdas()
        .into_iter()
        .map(|l| {
            let lambda = recorded_lambda(cfg, l);
            let cell: Vec<&RunResult> = runs.iter().filter(|r| r.lambda == lambda).collect();
            let means: Vec<f64> = cell.iter().filter_map(|r| r.eval_mean()).collect();
            let stds: Vec<f64> = cell.iter().filter_map(|r| r.eval_std()).collect();
            let cvars: Vec<f64> = cell.iter().filter_map(|r| r.eval_cvar(0.05)).collect();
            let seed_mean_std = (means.len() >= 2).then(|| {
                let m = mean(&means).unwrap_or(0.0);
                (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64).sqrt()
            });
            SummaryRow {
                env: cfg.environment.as_str().into(),
                algo: cfg.algorithm.as_str().into(),
                lambda,
                runs: cell.len(),
                diverged: cell.iter().filter(|r| r.status == RunStatus::Diverged).count(),
                eval_mean: mean(&means),
                eval_std: mean(&stds),
                eval_cvar_05: mean(&cvars),
                seed_mean_std,
            }
        })
        .collect()
}

/// Runs every (λ, seed) cell. Diverged cells are recorded, not fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let runs = match cfg.environment {
        EnvName::Option => {
            let env = AmericanOption::new(cfg.option.clone())?;
            let policy = GibbsPolicy::with_temperature(env.default_features(), cfg.temperature)?;
            run_grid(cfg, &env, &policy)?
        }
        EnvName::Stopping => {
            let env = OptimalStopping::new(cfg.stopping.clone())?;
            let policy = GibbsPolicy::with_temperature(env.default_features(), cfg.temperature)?;
            run_grid(cfg, &env, &policy)?
        }
        EnvName::Portfolio => {
            let env = Portfolio::new(cfg.portfolio.clone())?;
            let policy = GibbsPolicy::with_temperature(env.default_features(), cfg.temperature)?;
            run_grid(cfg, &env, &policy)?
        }
        EnvName::Chain => {
            let env = chain_mdp(cfg.chain.spec()?)?;
            let policy = GibbsPolicy::with_temperature(env.default_features(), cfg.temperature)?;
            run_grid(cfg, &env, &policy)?
        }
    };
    let summary = summarize_runs(cfg, &runs);
    Ok(ExperimentResults {
        config: cfg.clone(),
        runs,
        summary,
    })
}

/// Among the rows whose mean is within `tolerance` (relative) of
/// `reference_mean`, the one with the lowest evaluation std.
pub fn best_lambda(summary: &[SummaryRow], reference_mean: f64, tolerance: f64) -> Option<&SummaryRow> {
    summary
        .iter()
        .filter(|r| match r.eval_mean {
            Some(m) => (m - reference_mean).abs() <= tolerance * reference_mean.abs(),
            None => false,
        })
        .filter(|r| r.eval_std.is_some())
        .min_by(|a, b| a.eval_std.partial_cmp(&b.eval_std).unwrap_or(std::cmp::Ordering::Equal))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bandit_config() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            r#"
environment = "chain"
algorithm = "mvp"
lambda_grid = [0.5]
seeds = [1, 2]
episodes = 200
eval_episodes = 100
[chain]
builtin = "equal_mean_bandit"
"#,
        )
        .unwrap()
    }

    #[test]
    fn cardinality() {
        let res = run_experiment(&bandit_config()).unwrap();
        assert_eq!(res.runs.len(), 2);
        assert_eq!(res.summary.len(), 1);
        assert_eq!(res.summary[0].runs, 2);
        assert_eq!(res.runs[0].train_curve.len(), 200);
    }

    #[test]
    fn evaluation_is_pure() {
        let env = chain_mdp(mvpg::envs::ChainSpec::three_state_chain()).unwrap();
        let policy = GibbsPolicy::new(env.default_features());
        let theta = vec![0.1; 6];
        let a = evaluate(&env, &policy, &theta, 500, 9, &[0.05], 5).unwrap();
        let b = evaluate(&env, &policy, &theta, 500, 9, &[0.05], 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pg_runs_once_per_seed() {
        let mut cfg = bandit_config();
        cfg.algorithm = crate::config::AlgoName::Pg;
        cfg.lambda_grid = vec![0.5, 1.0, 2.0];
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.runs.len(), 2);
        assert!(res.runs.iter().all(|r| r.lambda == 0.0));
    }

    #[test]
    fn divergence_is_recorded() {
        let mut cfg = bandit_config();
        cfg.theta_stepsize = mvpg::StepsizeSchedule::constant(1e300).unwrap();
        cfg.y_stepsize = mvpg::StepsizeSchedule::constant(1e300).unwrap();
        let res = run_experiment(&cfg).unwrap();
        assert!(res.any_diverged());
        assert!(res.runs.iter().all(|r| r.error.is_some() && r.eval.is_none()));
    }

    #[test]
    fn best_lambda_rule() {
        let row = |lambda, m, s| SummaryRow {
            env: "x".into(),
            algo: "mvp".into(),
            lambda,
            runs: 1,
            diverged: 0,
            eval_mean: Some(m),
            eval_std: Some(s),
            eval_cvar_05: None,
            seed_mean_std: None,
        };
        let rows = vec![row(0.1, 1.0, 0.5), row(1.0, 0.96, 0.2), row(2.0, 0.8, 0.1)];
        assert_eq!(best_lambda(&rows, 1.0, 0.05).unwrap().lambda, 1.0);
    }
}
