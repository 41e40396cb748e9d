use mvpg::envs::{chain_mdp, ChainMdp, ChainSpec};
use mvpg::objective::{
    dual_gradient, mean_variance_objective, policy_gradient, sample_dual_gradient, sample_policy_gradient,
};
use mvpg::oracle::{
    dp_moments, enumerate_trajectories, estimator_bias_report, exact_moments, exact_true_gradient, expectation,
    expectation_vec, finite_difference, total_probability, EnumerationOptions, DEFAULT_FD_STEP,
};
use mvpg::policy::GibbsPolicy;
use mvpg::rng::{stream, Stream};

fn envs() -> Vec<(&'static str, ChainMdp)> {
    vec![
        ("bandit", chain_mdp(ChainSpec::equal_mean_bandit()).unwrap()),
        ("chain", chain_mdp(ChainSpec::three_state_chain()).unwrap()),
    ]
}

fn theta_for(dim: usize) -> Vec<f64> {
    (0..dim).map(|i| 0.3 * ((i as f64) * 1.7).sin()).collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn enumeration_agrees_with_backward_recursion() {
    for (name, env) in envs() {
        let policy = GibbsPolicy::new(env.default_features());
        let theta = theta_for(env.default_features().dim_hint());
        let trajs = enumerate_trajectories(&env, &policy, &theta, EnumerationOptions::default()).unwrap();
        assert!((total_probability(&trajs) - 1.0).abs() < 1e-12, "{name}");
        let a = exact_moments(&env, &policy, &theta).unwrap();
        let b = dp_moments(&env, &policy, &theta).unwrap();
        assert!((a.j - b.j).abs() < 1e-10 && (a.m - b.m).abs() < 1e-10, "{name}");
        assert!(close(&a.grad_j, &b.grad_j, 1e-10), "{name}");
        assert!(close(&a.grad_m, &b.grad_m, 1e-10), "{name}");
    }
}

#[test]
fn estimators_are_unbiased_under_enumeration() {
    for (name, env) in envs() {
        let policy = GibbsPolicy::new(env.default_features());
        let dim = env.default_features().dim_hint();
        let theta = theta_for(dim);
        let trajs = enumerate_trajectories(&env, &policy, &theta, EnumerationOptions::default()).unwrap();
        let target = dp_moments(&env, &policy, &theta).unwrap();
        for &(y, lambda) in &[(0.0, 1.0), (0.7, 0.5), (-1.2, 3.0)] {
            let gy = expectation(&trajs, |t| sample_dual_gradient(t.ret, y, lambda));
            assert!((gy - dual_gradient(&target, y, lambda)).abs() < 1e-10, "{name}");
            assert!((gy - (2.0 * target.j + 1.0 / lambda - 2.0 * y)).abs() < 1e-10, "{name}");
            let gt = expectation_vec(&trajs, dim, |t| sample_policy_gradient(t.ret, y, &t.omega));
            assert!(close(&gt, &policy_gradient(&target, y), 1e-10), "{name}");
        }
        let r_omega = expectation_vec(&trajs, dim, |t| t.omega.iter().map(|w| t.ret * w).collect());
        let r2_omega = expectation_vec(&trajs, dim, |t| t.omega.iter().map(|w| t.ret * t.ret * w).collect());
        assert!(close(&r_omega, &target.grad_j, 1e-10), "{name}");
        assert!(close(&r2_omega, &target.grad_m, 1e-10), "{name}");
    }
}

#[test]
fn monte_carlo_means_within_three_standard_errors() {
    for (i, (name, env)) in envs().into_iter().enumerate() {
        let policy = GibbsPolicy::new(env.default_features());
        let theta = theta_for(env.default_features().dim_hint());
        let mut rng = stream(100 + i as u64, Stream::Oracle);
        let report = estimator_bias_report(&env, &policy, &theta, 0.4, 1.0, 100_000, &mut rng).unwrap();
        assert!(report.within_stderr(3.0), "{name}: {report:?}");
    }
}

#[test]
fn true_gradient_matches_finite_differences() {
    let env = chain_mdp(ChainSpec::three_state_chain()).unwrap();
    let policy = GibbsPolicy::new(env.default_features());
    let theta = theta_for(env.default_features().dim_hint());
    for lambda in [0.0, 0.5, 2.0] {
        let exact = exact_true_gradient(&exact_moments(&env, &policy, &theta).unwrap(), lambda);
        let fd = finite_difference(
            |t| mean_variance_objective(&exact_moments(&env, &policy, t).unwrap(), lambda, 0.0),
            &theta,
            DEFAULT_FD_STEP,
        );
        assert!(close(&exact, &fd, 1e-6), "lambda {lambda}: {exact:?} vs {fd:?}");
    }
}

trait DimHint {
    fn dim_hint(&self) -> usize;
}

impl DimHint for mvpg::envs::ChainFeatures {
    fn dim_hint(&self) -> usize {
        mvpg::policy::FeatureMap::<mvpg::envs::ChainState>::dim(self)
    }
}

#[test]
fn two_timescale_direction_with_exact_mean_is_true_gradient() {
    let env = chain_mdp(ChainSpec::three_state_chain()).unwrap();
    let policy = GibbsPolicy::new(env.default_features());
    let dim = env.default_features().dim_hint();
    let theta = theta_for(dim);
    let trajs = enumerate_trajectories(&env, &policy, &theta, EnumerationOptions::default()).unwrap();
    let mom = dp_moments(&env, &policy, &theta).unwrap();
    let lambda = 0.8;
    let direction = expectation_vec(&trajs, dim, |t| {
        let c = t.ret - lambda * (t.ret * t.ret - 2.0 * mom.j * t.ret);
        t.omega.iter().map(|w| c * w).collect()
    });
    assert!(close(&direction, &exact_true_gradient(&mom, lambda), 1e-10));
}
