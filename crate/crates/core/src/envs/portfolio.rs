//! Two-asset portfolio with a liquid asset and W-step non-liquid tranches.
//!
//! Each step, in order:
//! 1. the non-liquid rate regime switches with probability `p_switch`;
//! 2. every outstanding tranche defaults (value lost) with probability `p_risk`;
//! 3. tranches with one step to maturity pay principal × the rate fixed when
//!    they were bought, the rest move one step closer to maturity;
//! 4. liquid cash grows by the gross rate `r_l`;
//! 5. `invest` moves η of total wealth from cash into a fresh W-step tranche
//!    at the current regime rate, provided the liquid share is at least η.
//!
//! The reward is the change in wealth (cash plus tranche principal) scaled by
//! `reward_scale`; episodes last exactly τ steps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_positive, check_probability, Environment, Step};
use crate::error::{Error, Result};
use crate::policy::{write_action_block, FeatureMap};

pub const DO_NOTHING: usize = 0;
pub const INVEST: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortfolioParams {
    pub r_l: f64,
    pub r_nl_high: f64,
    pub r_nl_low: f64,
    pub p_risk: f64,
    pub p_switch: f64,
    #[serde(rename = "W")]
    pub w: usize,
    pub eta: f64,
    pub tau: usize,
    pub startup_cash: f64,
    /// Multiplier applied to wealth increments before they are reported as
    /// rewards (1 keeps currency units).
    pub reward_scale: f64,
}

impl Default for PortfolioParams {
    fn default() -> Self {
        Self {
            r_l: 1.001,
            r_nl_high: 2.0,
            r_nl_low: 1.1,
            p_risk: 0.05,
            p_switch: 0.1,
            w: 4,
            eta: 0.2,
            tau: 50,
            startup_cash: 100_000.0,
            reward_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tranche {
    pub principal: f64,
    /// Gross rate paid at maturity.
    pub rate: f64,
    pub time_to_maturity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioState {
    pub cash: f64,
    pub tranches: Vec<Tranche>,
    pub high_regime: bool,
    pub k: usize,
}

impl PortfolioState {
    pub fn wealth(&self) -> f64 {
        self.cash + self.tranches.iter().map(|t| t.principal).sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct Portfolio {
    params: PortfolioParams,
}

impl Portfolio {
    pub fn new(params: PortfolioParams) -> Result<Self> {
        check_positive("r_l", params.r_l)?;
        check_positive("r_nl_high", params.r_nl_high)?;
        check_positive("r_nl_low", params.r_nl_low)?;
        check_probability("p_risk", params.p_risk)?;
        check_probability("p_switch", params.p_switch)?;
        check_positive("startup_cash", params.startup_cash)?;
        check_positive("reward_scale", params.reward_scale)?;
        if !(params.eta > 0.0 && params.eta < 1.0) {
            return Err(Error::Config(format!("eta must lie in (0, 1), got {}", params.eta)));
        }
        if params.w == 0 || params.tau == 0 {
            return Err(Error::Config("W and tau must be at least 1".into()));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &PortfolioParams {
        &self.params
    }

    pub fn default_features(&self) -> PortfolioFeatures {
        PortfolioFeatures {
            params: self.params.clone(),
        }
    }

    fn regime_rate(&self, high: bool) -> f64 {
        if high {
            self.params.r_nl_high
        } else {
            self.params.r_nl_low
        }
    }

    /// x(k) ∈ ℝ^{W+2}: liquid share, share by time to maturity 1..W, and the
    /// regime rate minus its stationary mean.
    pub fn observation(&self, state: &PortfolioState) -> Vec<f64> {
        let w = self.params.w;
        let wealth = state.wealth();
        let mut x = vec![0.0; w + 2];
        x[0] = state.cash / wealth;
        for t in &state.tranches {
            x[t.time_to_maturity] += t.principal / wealth;
        }
        let mean = 0.5 * (self.params.r_nl_high + self.params.r_nl_low);
        x[w + 1] = self.regime_rate(state.high_regime) - mean;
        x
    }

    fn check_allocation(&self, state: &PortfolioState) -> Result<()> {
        let x = self.observation(state);
        let shares = &x[..=self.params.w];
        let sum: f64 = shares.iter().sum();
        if shares.iter().any(|v| !(-1e-12..=1.0 + 1e-12).contains(v)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Consistency(format!(
                "allocation {shares:?} does not lie on the simplex"
            )));
        }
        Ok(())
    }
}

pub fn portfolio_step<R: Rng + ?Sized>(
    env: &Portfolio,
    state: &PortfolioState,
    action: usize,
    rng: &mut R,
) -> Result<Step<PortfolioState>> {
    env.step(state, action, rng)
}

impl Environment for Portfolio {
    type State = PortfolioState;

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> PortfolioState {
        PortfolioState {
            cash: self.params.startup_cash,
            tranches: Vec::new(),
            high_regime: rng.gen::<f64>() < 0.5,
            k: 0,
        }
    }

    fn step<R: Rng + ?Sized>(&self, state: &PortfolioState, action: usize, rng: &mut R) -> Result<Step<PortfolioState>> {
        if action > INVEST {
            return Err(Error::InfeasibleAction {
                action,
                available: 2,
            });
        }
        self.check_allocation(state)?;
        let p = &self.params;
        let before = state.wealth();

        let mut high_regime = state.high_regime;
        if rng.gen::<f64>() < p.p_switch {
            high_regime = !high_regime;
        }

        let mut cash = state.cash;
        let mut tranches = Vec::with_capacity(state.tranches.len() + 1);
        for t in &state.tranches {
            if rng.gen::<f64>() < p.p_risk {
                continue;
            }
            if t.time_to_maturity <= 1 {
                cash += t.principal * t.rate;
            } else {
                tranches.push(Tranche {
                    time_to_maturity: t.time_to_maturity - 1,
                    ..t.clone()
                });
            }
        }
        cash *= p.r_l;

        if action == INVEST {
            let wealth = cash + tranches.iter().map(|t| t.principal).sum::<f64>();
            if cash >= p.eta * wealth {
                let amount = p.eta * wealth;
                cash -= amount;
                tranches.push(Tranche {
                    principal: amount,
                    rate: self.regime_rate(high_regime),
                    time_to_maturity: p.w,
                });
            }
        }

        let k = state.k + 1;
        let next = PortfolioState {
            cash,
            tranches,
            high_regime,
            k,
        };
        let reward = (next.wealth() - before) * p.reward_scale;
        Ok(Step {
            next,
            reward,
            terminal: k >= p.tau,
        })
    }

    fn num_actions(&self, _state: &PortfolioState) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.params.tau
    }

    fn reward_bound(&self) -> f64 {
        let p = &self.params;
        let growth = p.r_l.max(p.r_nl_high).max(p.r_nl_low).max(1.0);
        p.startup_cash * growth.powi(p.tau as i32) * p.reward_scale
    }
}

/// ψ(s) = (1, x(k)) in the block of the chosen action.
#[derive(Debug, Clone)]
pub struct PortfolioFeatures {
    params: PortfolioParams,
}

impl FeatureMap<PortfolioState> for PortfolioFeatures {
    fn dim(&self) -> usize {
        2 * (self.params.w + 3)
    }

    fn num_actions(&self, _state: &PortfolioState) -> usize {
        2
    }

    fn write_features(&self, state: &PortfolioState, action: usize, out: &mut [f64]) {
        let w = self.params.w;
        let wealth = state.wealth();
        let mut base = vec![0.0; w + 3];
        base[0] = 1.0;
        base[1] = state.cash / wealth;
        for t in &state.tranches {
            base[1 + t.time_to_maturity] += t.principal / wealth;
        }
        let rate = if state.high_regime {
            self.params.r_nl_high
        } else {
            self.params.r_nl_low
        };
        base[w + 2] = rate - 0.5 * (self.params.r_nl_high + self.params.r_nl_low);
        write_action_block(&base, action, 2, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;

    fn all_liquid(env: &Portfolio) -> PortfolioState {
        PortfolioState {
            cash: env.params().startup_cash,
            tranches: vec![],
            high_regime: true,
            k: 0,
        }
    }

    #[test]
    fn liquid_accrual() {
        let env = Portfolio::new(PortfolioParams::default()).unwrap();
        let s = all_liquid(&env);
        // draws ~1: no switch, no default
        let step = portfolio_step(&env, &s, DO_NOTHING, &mut StepRng::new(u64::MAX, 0)).unwrap();
        assert!((step.next.wealth() - 100_100.0).abs() < 1e-6);
        assert!((step.reward - 100.0).abs() < 1e-6);
    }

    #[test]
    fn forced_default_zeroes_tranche() {
        let params = PortfolioParams {
            p_risk: 1.0,
            ..PortfolioParams::default()
        };
        let env = Portfolio::new(params).unwrap();
        let s = PortfolioState {
            cash: 80_000.0,
            tranches: vec![Tranche {
                principal: 20_000.0,
                rate: 2.0,
                time_to_maturity: 3,
            }],
            high_regime: true,
            k: 5,
        };
        let step = env.step(&s, DO_NOTHING, &mut StepRng::new(u64::MAX, 0)).unwrap();
        assert!(step.next.tranches.is_empty());
        assert!((step.next.wealth() - 80_000.0 * 1.001).abs() < 1e-6);
    }

    #[test]
    fn regime_feature_is_symmetric() {
        let params = PortfolioParams {
            p_switch: 0.5,
            ..PortfolioParams::default()
        };
        let env = Portfolio::new(params).unwrap();
        let mut s = all_liquid(&env);
        let hi = env.observation(&s)[5];
        s.high_regime = false;
        let lo = env.observation(&s)[5];
        assert!((hi - 0.45).abs() < 1e-12);
        assert!((hi + lo).abs() < 1e-12);
    }

    #[test]
    fn invest_creates_tranche_and_matures() {
        let params = PortfolioParams {
            p_risk: 0.0,
            p_switch: 0.0,
            ..PortfolioParams::default()
        };
        let env = Portfolio::new(params).unwrap();
        let mut rng = StepRng::new(u64::MAX, 0);
        let s = all_liquid(&env);
        let mut step = env.step(&s, INVEST, &mut rng).unwrap();
        assert_eq!(step.next.tranches.len(), 1);
        assert_eq!(step.next.tranches[0].time_to_maturity, 4);
        let principal = step.next.tranches[0].principal;
        assert!((principal - 0.2 * 100_100.0).abs() < 1e-6);
        for _ in 0..3 {
            step = env.step(&step.next, DO_NOTHING, &mut rng).unwrap();
            assert_eq!(step.next.tranches.len(), 1);
        }
        let cash_before = step.next.cash;
        step = env.step(&step.next, DO_NOTHING, &mut rng).unwrap();
        assert!(step.next.tranches.is_empty());
        assert!((step.next.cash - (cash_before + principal * 2.0) * 1.001).abs() < 1e-6);
    }

    #[test]
    fn invest_requires_liquid_share() {
        let env = Portfolio::new(PortfolioParams::default()).unwrap();
        let s = PortfolioState {
            cash: 10.0,
            tranches: vec![Tranche {
                principal: 90.0,
                rate: 2.0,
                time_to_maturity: 4,
            }],
            high_regime: false,
            k: 0,
        };
        let step = env.step(&s, INVEST, &mut StepRng::new(u64::MAX, 0)).unwrap();
        assert_eq!(step.next.tranches.len(), 1);
    }

    #[test]
    fn terminal_at_tau() {
        let env = Portfolio::new(PortfolioParams::default()).unwrap();
        let mut s = all_liquid(&env);
        s.k = 49;
        let step = env.step(&s, DO_NOTHING, &mut StepRng::new(u64::MAX, 0)).unwrap();
        assert!(step.terminal);
    }

    #[test]
    fn corrupted_allocation_is_rejected() {
        let env = Portfolio::new(PortfolioParams::default()).unwrap();
        let s = PortfolioState {
            cash: -10.0,
            tranches: vec![Tranche {
                principal: 20.0,
                rate: 2.0,
                time_to_maturity: 2,
            }],
            high_regime: true,
            k: 0,
        };
        assert!(matches!(
            env.step(&s, DO_NOTHING, &mut StepRng::new(0, 0)),
            Err(Error::Consistency(_))
        ));
    }
}
