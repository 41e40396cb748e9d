//! Browser demo: small training runs and the bound calculator exposed to JS.

use wasm_bindgen::prelude::*;

use mvpg::envs::{chain_mdp, episode_return, AmericanOption, ChainSpec, EnumerableEnvironment, OptionParams};
use mvpg::optimizers::{finite_sample_bound, BoundInputs};
use mvpg::rng::{stream, Stream};
use mvpg::{run, Algorithm, GibbsPolicy, RiskConfig, RunOptions, StepsizeSchedule};

fn js_err(e: mvpg::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn algorithm(lambda: f64) -> Algorithm {
    if lambda > 0.0 {
        Algorithm::Mvp
    } else {
        Algorithm::VanillaPg
    }
}

fn config(lambda: f64, beta_theta: f64, beta_y: f64, episodes: u32, seed: u32) -> Result<RiskConfig, JsValue> {
    RiskConfig::new(
        if lambda > 0.0 { lambda } else { 1.0 },
        StepsizeSchedule::constant(beta_theta).map_err(js_err)?,
        StepsizeSchedule::constant(beta_y).map_err(js_err)?,
        u64::from(episodes),
        u64::from(seed),
    )
    .map_err(js_err)
}

/// Probability of the deterministic arm of the equal-mean bandit along a
/// training run, sampled at `points` evenly spaced episodes. λ = 0 trains
/// the risk-neutral baseline.
#[wasm_bindgen]
pub fn bandit_curve(lambda: f64, episodes: u32, seed: u32, points: u32) -> Result<Vec<f64>, JsValue> {
    let env = chain_mdp(ChainSpec::equal_mean_bandit()).map_err(js_err)?;
    let policy = GibbsPolicy::new(env.default_features());
    let cfg = config(lambda, 0.001, 0.01, episodes.max(1), seed)?;
    let stride = (u64::from(episodes) / u64::from(points.max(1))).max(1);
    let opts = RunOptions {
        snapshot_stride: Some(stride),
        initial: None,
    };
    let out = run(algorithm(lambda), &env, &policy, &cfg, &opts).map_err(js_err)?;
    let start = env.initial_states()[0].1;
    let mut curve = vec![0.5];
    for (_, theta) in out.history.thetas() {
        curve.push(policy.action_probabilities(theta, &start).map_err(js_err)?[0]);
    }
    Ok(curve)
}

/// Trains on the option (MVP at `lambda`, or the baseline when λ = 0) and
/// returns `eval` evaluation returns of the trained policy.
#[wasm_bindgen]
pub fn option_returns(lambda: f64, episodes: u32, seed: u32, eval: u32) -> Result<Vec<f64>, JsValue> {
    let env = AmericanOption::new(OptionParams::default()).map_err(js_err)?;
    let policy = GibbsPolicy::new(env.default_features());
    let cfg = config(lambda, 0.03, 0.01, episodes.max(1), seed)?;
    let out = run(algorithm(lambda), &env, &policy, &cfg, &RunOptions::default()).map_err(js_err)?;
    let mut env_rng = stream(u64::from(seed), Stream::EvalEnvironment);
    let mut policy_rng = stream(u64::from(seed), Stream::EvalPolicy);
    (0..eval)
        .map(|_| episode_return(&env, &policy, &out.output.theta, &mut env_rng, &mut policy_rng).map_err(js_err))
        .collect()
}

/// Finite-sample bound for a constant stepsize with two blocks.
#[wasm_bindgen]
pub fn gradient_bound(
    lipschitz: f64,
    grad_bound: f64,
    noise: f64,
    bias: f64,
    beta: f64,
    episodes: u32,
    f_gap: f64,
) -> Result<f64, JsValue> {
    let inputs = BoundInputs::constant_step(lipschitz, grad_bound, noise, bias, beta, u64::from(episodes), f_gap);
    finite_sample_bound(&inputs).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_matches_noiseless_case() {
        assert!((gradient_bound(1.0, 0.0, 0.0, 0.0, 0.1, 100, 1.0).unwrap() - 1.0 / 9.5).abs() < 1e-15);
    }

    #[test]
    fn bandit_curve_has_requested_resolution() {
        let c = bandit_curve(2.0, 2000, 1, 20).unwrap();
        assert_eq!(c.len(), 21);
        assert!(c.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn option_returns_are_bounded() {
        let r = option_returns(1.0, 500, 3, 200).unwrap();
        assert_eq!(r.len(), 200);
        assert!(r.iter().all(|&x| (0.0..=10.0).contains(&x)));
    }
}
