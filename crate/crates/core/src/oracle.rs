//! Exact moments and gradients on small MDPs.
//!
//! Two independent routes are provided:
//! - [`enumerate_trajectories`] / [`exact_moments`] list every trajectory with
//!   its probability, return and ω, and apply the likelihood-ratio identities
//!   ∇J = E[Rω], ∇M = E[R²ω];
//! - [`dp_moments`] runs a backward recursion over the state tree using the
//!   product rule on π_θ directly, never forming ω.
//!
//! Agreement of the two is what makes estimator-bias checks meaningful.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::envs::{generate_episode, EnumerableEnvironment, Step};
use crate::error::{Error, Result};
use crate::objective::{dual_gradient, policy_gradient, sample_dual_gradient, sample_policy_gradient, ReturnMoments};
use crate::policy::{FeatureMap, GibbsPolicy};
use crate::rng::StreamRng;

pub const DEFAULT_TRAJECTORY_CAP: usize = 1_000_000;
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    pub cap: usize,
    /// Drop branches whose probability falls below this threshold. `None`
    /// (the default) keeps every branch.
    pub prune_below: Option<f64>,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_TRAJECTORY_CAP,
            prune_below: None,
        }
    }
}

/// One complete trajectory: probability under π_θ and the environment,
/// return, and ω = Σ ∇ ln π_θ(a_k|s_k).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub prob: f64,
    pub ret: f64,
    pub omega: Vec<f64>,
}

pub fn enumerate_trajectories<E, F>(
    env: &E,
    policy: &GibbsPolicy<F>,
    theta: &[f64],
    opts: EnumerationOptions,
) -> Result<Vec<Trajectory>>
where
    E: EnumerableEnvironment,
    F: FeatureMap<E::State>,
{
    let mut out = Vec::new();
    let dim = policy.feature_map().dim();
    for (p0, s0) in env.initial_states() {
        let mut omega = vec![0.0; dim];
        walk(env, policy, theta, &opts, &s0, 0, p0, 0.0, &mut omega, &mut out)?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk<E, F>(
    env: &E,
    policy: &GibbsPolicy<F>,
    theta: &[f64],
    opts: &EnumerationOptions,
    state: &E::State,
    depth: usize,
    prob: f64,
    ret: f64,
    omega: &mut Vec<f64>,
    out: &mut Vec<Trajectory>,
) -> Result<()>
where
    E: EnumerableEnvironment,
    F: FeatureMap<E::State>,
{
    if depth >= env.horizon() {
        return Err(Error::Consistency(format!(
            "trajectory did not terminate within {} steps",
            env.horizon()
        )));
    }
    let probs = policy.action_probabilities(theta, state)?;
    for (a, &pa) in probs.iter().enumerate() {
        let score = policy.score_with_probs(&probs, state, a)?;
        for (q, Step { next, reward, terminal }) in env.outcomes(state, a)? {
            let p = prob * pa * q;
            if let Some(th) = opts.prune_below {
                if p < th {
                    continue;
                }
            }
            for (o, s) in omega.iter_mut().zip(&score) {
                *o += s;
            }
            if terminal {
                if out.len() >= opts.cap {
                    return Err(Error::EnumerationLimit { cap: opts.cap });
                }
                out.push(Trajectory {
                    prob: p,
                    ret: ret + reward,
                    omega: omega.clone(),
                });
            } else {
                walk(env, policy, theta, opts, &next, depth + 1, p, ret + reward, omega, out)?;
            }
            for (o, s) in omega.iter_mut().zip(&score) {
                *o -= s;
            }
        }
    }
    Ok(())
}

/// Σ p·f(trajectory) with compensated summation, for scalar `f`.
pub fn expectation(trajs: &[Trajectory], f: impl Fn(&Trajectory) -> f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for t in trajs {
        acc.add(t.prob * f(t));
    }
    acc.value()
}

/// Σ p·f(trajectory) for vector-valued `f`.
pub fn expectation_vec(trajs: &[Trajectory], dim: usize, f: impl Fn(&Trajectory) -> Vec<f64>) -> Vec<f64> {
    let mut acc = vec![CompensatedSum::default(); dim];
    for t in trajs {
        for (a, v) in acc.iter_mut().zip(f(t)) {
            a.add(t.prob * v);
        }
    }
    acc.iter().map(CompensatedSum::value).collect()
}

/// J, M, ∇J, ∇M by full trajectory enumeration.
pub fn exact_moments<E, F>(env: &E, policy: &GibbsPolicy<F>, theta: &[f64]) -> Result<ReturnMoments>
where
    E: EnumerableEnvironment,
    F: FeatureMap<E::State>,
{
    exact_moments_with(env, policy, theta, EnumerationOptions::default())
}

pub fn exact_moments_with<E, F>(
    env: &E,
    policy: &GibbsPolicy<F>,
    theta: &[f64],
    opts: EnumerationOptions,
) -> Result<ReturnMoments>
where
    E: EnumerableEnvironment,
    F: FeatureMap<E::State>,
{
    let trajs = enumerate_trajectories(env, policy, theta, opts)?;
    Ok(moments_from_trajectories(&trajs, policy.feature_map().dim()))
}

pub fn moments_from_trajectories(trajs: &[Trajectory], dim: usize) -> ReturnMoments {
    let scale = |c: f64, w: &[f64]| w.iter().map(|v| c * v).collect::<Vec<_>>();
    ReturnMoments {
        j: expectation(trajs, |t| t.ret),
        m: expectation(trajs, |t| t.ret * t.ret),
        grad_j: expectation_vec(trajs, dim, |t| scale(t.ret, &t.omega)),
        grad_m: expectation_vec(trajs, dim, |t| scale(t.ret * t.ret, &t.omega)),
    }
}

/// Total probability mass of an enumeration (1 up to rounding when nothing
/// is pruned).
pub fn total_probability(trajs: &[Trajectory]) -> f64 {
    expectation(trajs, |_| 1.0)
}

/// Moments of the return-to-go from a state, with gradients.
struct ToGo {
    v: f64,
    m: f64,
    grad_v: Vec<f64>,
    grad_m: Vec<f64>,
}

/// J, M, ∇J, ∇M by backward recursion over the state tree.
///
/// For the return-to-go G from state s,
/// V(s) = Σ_a π(a|s) Σ_o q_o (r_o + V(s'_o)) and
/// M(s) = Σ_a π(a|s) Σ_o q_o (r_o² + 2 r_o V(s'_o) + M(s'_o)),
/// differentiated with ∂π(a|s)/∂θ = π(a|s)(φ(s,a) − Σ_b π(b|s)φ(s,b))/T.
pub fn dp_moments<E, F>(env: &E, policy: &GibbsPolicy<F>, theta: &[f64]) -> Result<ReturnMoments>
where
    E: EnumerableEnvironment,
    F: FeatureMap<E::State>,
{
    let dim = policy.feature_map().dim();
    let mut j = 0.0;
    let mut m = 0.0;
    let mut grad_j = vec![0.0; dim];
    let mut grad_m = vec![0.0; dim];
    for (p0, s0) in env.initial_states() {
        let g = to_go(env, policy, theta, &s0, 0)?;
        j += p0 * g.v;
        m += p0 * g.m;
        for i in 0..dim {
            grad_j[i] += p0 * g.grad_v[i];
            grad_m[i] += p0 * g.grad_m[i];
        }
    }
    Ok(ReturnMoments { j, m, grad_j, grad_m })
}

fn to_go<E, F>(env: &E, policy: &GibbsPolicy<F>, theta: &[f64], state: &E::State, depth: usize) -> Result<ToGo>
where
    E: EnumerableEnvironment,
    F: FeatureMap<E::State>,
{
    if depth >= env.horizon() {
        return Err(Error::Consistency("state tree deeper than the horizon".into()));
    }
    let dim = policy.feature_map().dim();
    let fm = policy.feature_map();
    let n = fm.num_actions(state);
    let probs = policy.action_probabilities(theta, state)?;
    let t = policy.temperature();

    let mut mean_phi = vec![0.0; dim];
    let feats: Vec<Vec<f64>> = (0..n).map(|a| fm.features(state, a)).collect();
    for (phi, &p) in feats.iter().zip(&probs) {
        for (mp, f) in mean_phi.iter_mut().zip(phi) {
            *mp += p * f;
        }
    }

    let mut out = ToGo {
        v: 0.0,
        m: 0.0,
        grad_v: vec![0.0; dim],
        grad_m: vec![0.0; dim],
    };
    for a in 0..n {
        // action-conditional moments Q_v, Q_m and their gradients
        let mut qv = 0.0;
        let mut qm = 0.0;
        let mut gqv = vec![0.0; dim];
        let mut gqm = vec![0.0; dim];
        for (q, step) in env.outcomes(state, a)? {
            let r = step.reward;
            if step.terminal {
                qv += q * r;
                qm += q * r * r;
            } else {
                let next = to_go(env, policy, theta, &step.next, depth + 1)?;
                qv += q * (r + next.v);
                qm += q * (r * r + 2.0 * r * next.v + next.m);
                for i in 0..dim {
                    gqv[i] += q * next.grad_v[i];
                    gqm[i] += q * (2.0 * r * next.grad_v[i] + next.grad_m[i]);
                }
            }
        }
        let pa = probs[a];
        out.v += pa * qv;
        out.m += pa * qm;
        for i in 0..dim {
            let dpi = pa * (feats[a][i] - mean_phi[i]) / t;
            out.grad_v[i] += dpi * qv + pa * gqv[i];
            out.grad_m[i] += dpi * qm + pa * gqm[i];
        }
    }
    Ok(out)
}

/// ∇J − λ(∇M − 2J∇J): the gradient of the mean-variance objective,
/// including the product term that needs two independent trajectories to
/// estimate.
pub fn exact_true_gradient(mom: &ReturnMoments, lambda: f64) -> Vec<f64> {
    mom.grad_j
        .iter()
        .zip(&mom.grad_m)
        .map(|(gj, gm)| gj - lambda * (gm - 2.0 * mom.j * gj))
        .collect()
}

/// Central differences of `f` at `theta`.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, theta: &[f64], step: f64) -> Vec<f64> {
    let mut x = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + step;
            let hi = f(&x);
            x[i] = orig - step;
            let lo = f(&x);
            x[i] = orig;
            (hi - lo) / (2.0 * step)
        })
        .collect()
}

/// Approximation errors Δ^y = g̃^y − g^y and Δ^θ = g̃^θ − g^θ, summarised
/// over many episodes at a fixed (θ, y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientError {
    pub delta_y: f64,
    pub delta_theta: Vec<f64>,
    /// E[Δ^θ | θ, y], estimated by the sample mean.
    pub conditional_bias_theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub samples: usize,
    /// Sample means of Δ^y and Δ^θ.
    pub mean_error: GradientError,
    pub stderr_y: f64,
    pub stderr_theta: Vec<f64>,
    /// E[|Δ^y|²] and E[‖Δ^θ‖²], empirical estimates of σ².
    pub sigma_sq_y: f64,
    pub sigma_sq_theta: f64,
    pub exact_g_y: f64,
    pub exact_g_theta: Vec<f64>,
}

impl BiasReport {
    /// Whether every mean error lies within `k` standard errors of zero.
    /// Components with zero spread must match exactly (to 1e-12).
    pub fn within_stderr(&self, k: f64) -> bool {
        let ok = |m: f64, se: f64| m.abs() <= k * se + 1e-12;
        ok(self.mean_error.delta_y, self.stderr_y)
            && self
                .mean_error
                .delta_theta
                .iter()
                .zip(&self.stderr_theta)
                .all(|(&m, &se)| ok(m, se))
    }
}

/// Monte Carlo means of the single-episode estimators at fixed (θ, y),
/// compared with the exact block gradients.
#[allow(clippy::too_many_arguments)]
pub fn estimator_bias_report<E, F, R>(
    env: &E,
    policy: &GibbsPolicy<F>,
    theta: &[f64],
    y: f64,
    lambda: f64,
    samples: usize,
    rng: &mut R,
) -> Result<BiasReport>
where
    E: EnumerableEnvironment,
    F: FeatureMap<E::State>,
    R: Rng + ?Sized,
{
    if samples < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples,
        });
    }
    let mom = exact_moments(env, policy, theta)?;
    let g_y = dual_gradient(&mom, y, lambda);
    let g_theta = policy_gradient(&mom, y);
    let dim = g_theta.len();

    // independent transition and action streams seeded from the caller's rng
    let mut env_rng = StreamRng::seed_from_u64(rng.gen());
    let mut policy_rng = StreamRng::seed_from_u64(rng.gen());
    let mut sum_y = 0.0;
    let mut sumsq_y = 0.0;
    let mut sum_t = vec![0.0; dim];
    let mut sumsq_t = vec![0.0; dim];
    let mut sum_norm_sq = 0.0;
    for _ in 0..samples {
        let trace = generate_episode(env, policy, theta, &mut env_rng, &mut policy_rng)?;
        let r = trace.return_total();
        let dy = sample_dual_gradient(r, y, lambda) - g_y;
        sum_y += dy;
        sumsq_y += dy * dy;
        let gt = sample_policy_gradient(r, y, &trace.omega());
        let mut norm_sq = 0.0;
        for i in 0..dim {
            let d = gt[i] - g_theta[i];
            sum_t[i] += d;
            sumsq_t[i] += d * d;
            norm_sq += d * d;
        }
        sum_norm_sq += norm_sq;
    }
    let n = samples as f64;
    let stderr = |s: f64, ss: f64| {
        let mean = s / n;
        let var = ((ss - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    };
    let mean_t: Vec<f64> = sum_t.iter().map(|s| s / n).collect();
    Ok(BiasReport {
        samples,
        mean_error: GradientError {
            delta_y: sum_y / n,
            delta_theta: mean_t.clone(),
            conditional_bias_theta: mean_t,
        },
        stderr_y: stderr(sum_y, sumsq_y),
        stderr_theta: sum_t.iter().zip(&sumsq_t).map(|(&s, &ss)| stderr(s, ss)).collect(),
        sigma_sq_y: sumsq_y / n,
        sigma_sq_theta: sum_norm_sq / n,
        exact_g_y: g_y,
        exact_g_theta: g_theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{chain_mdp, ChainSpec};

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }

    #[test]
    fn deterministic_chain_moments() {
        let env = chain_mdp(ChainSpec::deterministic_chain(2)).unwrap();
        let pol = GibbsPolicy::new(env.default_features());
        let mom = exact_moments(&env, &pol, &[0.0, 0.0]).unwrap();
        assert_eq!(mom.j, 2.0);
        assert_eq!(mom.m, 4.0);
        assert_eq!(mom.variance(), 0.0);
    }

    #[test]
    fn two_outcome_moments() {
        let spec = ChainSpec {
            initial: vec![1.0],
            table: vec![vec![vec![
                crate::envs::ChainOutcome::terminal(0.5, 0.0),
                crate::envs::ChainOutcome::terminal(0.5, 2.0),
            ]]],
            horizon: 1,
        };
        let env = chain_mdp(spec).unwrap();
        let pol = GibbsPolicy::new(env.default_features());
        let mom = exact_moments(&env, &pol, &[0.0]).unwrap();
        assert_eq!((mom.j, mom.m, mom.variance()), (1.0, 2.0, 1.0));
    }

    #[test]
    fn bandit_has_three_trajectories() {
        let env = chain_mdp(ChainSpec::equal_mean_bandit()).unwrap();
        let pol = GibbsPolicy::new(env.default_features());
        let trajs = enumerate_trajectories(&env, &pol, &[0.0, 0.0], EnumerationOptions::default()).unwrap();
        assert_eq!(trajs.len(), 3);
        assert!((total_probability(&trajs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let env = chain_mdp(ChainSpec::three_state_chain()).unwrap();
        let pol = GibbsPolicy::new(env.default_features());
        let opts = EnumerationOptions {
            cap: 5,
            prune_below: None,
        };
        assert_eq!(
            enumerate_trajectories(&env, &pol, &[0.0; 6], opts),
            Err(Error::EnumerationLimit { cap: 5 })
        );
    }

    #[test]
    fn finite_difference_basics() {
        let g = finite_difference(|x| x[0] * x[0], &[3.0], DEFAULT_FD_STEP);
        assert!((g[0] - 6.0).abs() < 1e-8);
        assert_eq!(finite_difference(|_| 4.2, &[1.0, 2.0], 1e-5), vec![0.0, 0.0]);
    }

    #[test]
    fn true_gradient_without_risk_is_grad_j() {
        let mom = ReturnMoments {
            j: 0.3,
            m: 1.1,
            grad_j: vec![0.5, -0.2],
            grad_m: vec![1.0, 4.0],
        };
        assert_eq!(exact_true_gradient(&mom, 0.0), mom.grad_j);
    }
}
