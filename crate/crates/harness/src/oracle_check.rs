//! Exact-vs-sampled consistency check on a small chain MDP.

use mvpg::envs::chain_mdp;
use mvpg::objective::{dual_gradient, policy_gradient, sample_dual_gradient, sample_policy_gradient};
use mvpg::oracle::{
    dp_moments, enumerate_trajectories, estimator_bias_report, expectation, expectation_vec, moments_from_trajectories,
    total_probability, BiasReport, EnumerationOptions,
};
use mvpg::policy::{FeatureMap, GibbsPolicy};
use mvpg::rng::{stream, Stream};
use serde::Serialize;

use crate::config::{EnvName, ExperimentConfig};
use crate::error::{HarnessError, Result};

pub const EXACT_TOLERANCE: f64 = 1e-10;
pub const STDERR_MULTIPLE: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub trajectories: usize,
    pub total_probability: f64,
    pub j: f64,
    pub m: f64,
    pub lambda: f64,
    pub y: f64,
    /// Largest gap between trajectory enumeration and backward recursion.
    pub moment_gap: f64,
    /// Largest gap between enumerated estimator means and exact gradients.
    pub estimator_gap: f64,
    pub monte_carlo: BiasReport,
    pub passed: bool,
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs at θ = 0, y = 0, the first λ of the grid and the first seed, with
/// `eval_episodes` Monte Carlo samples.
pub fn oracle_check(cfg: &ExperimentConfig) -> Result<OracleReport> {
    if cfg.environment != EnvName::Chain {
        return Err(HarnessError::Config("oracle-check needs environment = \"chain\"".into()));
    }
    let env = chain_mdp(cfg.chain.spec()?)?;
    let policy = GibbsPolicy::with_temperature(env.default_features(), cfg.temperature)?;
    let dim = policy.feature_map().dim();
    let theta = vec![0.0; dim];
    let (lambda, y) = (cfg.lambda_grid[0], 0.0);

    let trajs = enumerate_trajectories(&env, &policy, &theta, EnumerationOptions::default())?;
    let enumerated = moments_from_trajectories(&trajs, dim);
    let dp = dp_moments(&env, &policy, &theta)?;
    let moment_gap = [
        (enumerated.j - dp.j).abs(),
        (enumerated.m - dp.m).abs(),
        max_gap(&enumerated.grad_j, &dp.grad_j),
        max_gap(&enumerated.grad_m, &dp.grad_m),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let gy = expectation(&trajs, |t| sample_dual_gradient(t.ret, y, lambda));
    let gt = expectation_vec(&trajs, dim, |t| sample_policy_gradient(t.ret, y, &t.omega));
    let estimator_gap = (gy - dual_gradient(&dp, y, lambda))
        .abs()
        .max(max_gap(&gt, &policy_gradient(&dp, y)));

    let mut rng = stream(cfg.seeds[0], Stream::Oracle);
    let monte_carlo = estimator_bias_report(&env, &policy, &theta, y, lambda, cfg.eval_episodes, &mut rng)?;
    let passed = moment_gap <= EXACT_TOLERANCE
        && estimator_gap <= EXACT_TOLERANCE
        && monte_carlo.within_stderr(STDERR_MULTIPLE);
    Ok(OracleReport {
        trajectories: trajs.len(),
        total_probability: total_probability(&trajs),
        j: dp.j,
        m: dp.m,
        lambda,
        y,
        moment_gap,
        estimator_gap,
        monte_carlo,
        passed,
    })
}
