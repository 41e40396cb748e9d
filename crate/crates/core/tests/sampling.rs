use mvpg::envs::{
    generate_episode, AmericanOption, Environment, OptimalStopping, OptionParams, Portfolio, PortfolioParams,
    StoppingParams,
};
use mvpg::optimizers::{select_block, Block};
use mvpg::policy::{FeatureMap, GibbsPolicy};
use mvpg::rng::{stream, Stream};
use rand::Rng;

struct OneHot(usize);

impl FeatureMap<()> for OneHot {
    fn dim(&self) -> usize {
        self.0
    }
    fn num_actions(&self, _s: &()) -> usize {
        self.0
    }
    fn write_features(&self, _s: &(), a: usize, out: &mut [f64]) {
        out.fill(0.0);
        out[a] = 1.0;
    }
}

fn within_binomial(count: u64, n: u64, p: f64) -> bool {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= 3.0 * sd
}

#[test]
fn sampled_action_frequencies_match_probabilities() {
    let policy = GibbsPolicy::new(OneHot(4));
    let theta = [0.5, -1.0, 0.0, 1.2];
    let probs = policy.action_probabilities(&theta, &()).unwrap();
    let mut rng = stream(7, Stream::Policy);
    let n = 100_000u64;
    let mut counts = [0u64; 4];
    for _ in 0..n {
        counts[policy.sample_action(&theta, &(), &mut rng).unwrap()] += 1;
    }
    for (c, p) in counts.iter().zip(&probs) {
        assert!(within_binomial(*c, n, *p), "{counts:?} vs {probs:?}");
    }
}

#[test]
fn block_selection_is_fair() {
    let mut rng = stream(11, Stream::BlockSelection);
    let n = 100_000u64;
    let dual = (0..n).filter(|_| select_block(rng.gen::<f64>()) == Block::Dual).count() as u64;
    assert!(within_binomial(dual, n, 0.5), "{dual}");
}

fn check_episodes<E, F>(env: &E, features: F, dim: usize, seed: u64)
where
    E: Environment,
    F: FeatureMap<E::State>,
{
    let policy = GibbsPolicy::new(features);
    let mut env_rng = stream(seed, Stream::Environment);
    let mut pol_rng = stream(seed, Stream::Policy);
    let mut theta_rng = stream(seed, Stream::Oracle);
    for _ in 0..300 {
        let theta: Vec<f64> = (0..dim).map(|_| theta_rng.gen_range(-2.0..2.0)).collect();
        let trace = generate_episode(env, &policy, &theta, &mut env_rng, &mut pol_rng).unwrap();
        assert!(trace.len() <= env.horizon());
        for r in trace.rewards() {
            assert!(r.abs() <= env.reward_bound() + 1e-9);
        }
    }
}

#[test]
fn episodes_terminate_and_respect_reward_bounds() {
    let option = AmericanOption::new(OptionParams::default()).unwrap();
    check_episodes(&option, option.default_features(), 8, 1);
    let stopping = OptimalStopping::new(StoppingParams::default()).unwrap();
    check_episodes(&stopping, stopping.default_features(), 8, 2);
    let portfolio = Portfolio::new(PortfolioParams::default()).unwrap();
    check_episodes(&portfolio, portfolio.default_features(), 14, 3);
}

#[test]
fn option_prices_stay_on_the_lattice() {
    let env = AmericanOption::new(OptionParams::default()).unwrap();
    let p = env.params().clone();
    let mut rng = stream(5, Stream::Environment);
    for _ in 0..200 {
        let mut s = env.reset(&mut rng);
        loop {
            let step = env.step(&s, mvpg::envs::option::HOLD, &mut rng).unwrap();
            let k = step.next.k as i32;
            let on_lattice = (0..=k).any(|ups| {
                let x = p.x0 * p.f_u.powi(ups) * p.f_d.powi(k - ups);
                (x - step.next.price).abs() <= 1e-12 * x
            });
            assert!(on_lattice);
            if step.terminal {
                assert_eq!(step.next.k, p.tau);
                assert_eq!(step.reward, env.payoff(step.next.price));
                break;
            }
            assert_eq!(step.reward, 0.0);
            s = step.next;
        }
    }
}
