use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::StepsizeSchedule;

/// How the returned iterate x̄_N is chosen from the training history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputOption {
    /// x̄_N = x_N.
    #[default]
    LastIterate,
    /// z uniform on {1, …, N}.
    UniformRandomIterate,
    /// z drawn with probability proportional to β_t^min − (L/2)(β_t^max)².
    WeightedRandomIterate { lipschitz: f64 },
}

impl OutputOption {
    pub fn is_random(&self) -> bool {
        !matches!(self, Self::LastIterate)
    }
}

/// Everything a risk-sensitive training run needs besides the environment
/// and the policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskConfig {
    lambda: f64,
    zeta: f64,
    theta_schedule: StepsizeSchedule,
    y_schedule: StepsizeSchedule,
    episodes: u64,
    output_option: OutputOption,
    seed: u64,
}

impl RiskConfig {
    pub fn new(
        lambda: f64,
        theta_schedule: StepsizeSchedule,
        y_schedule: StepsizeSchedule,
        episodes: u64,
        seed: u64,
    ) -> Result<Self> {
        RiskConfigBuilder {
            lambda,
            zeta: 0.0,
            theta_schedule,
            y_schedule,
            episodes,
            output_option: OutputOption::LastIterate,
            seed,
        }
        .build()
    }

    pub fn builder(
        lambda: f64,
        theta_schedule: StepsizeSchedule,
        y_schedule: StepsizeSchedule,
    ) -> RiskConfigBuilder {
        RiskConfigBuilder {
            lambda,
            zeta: 0.0,
            theta_schedule,
            y_schedule,
            episodes: 1,
            output_option: OutputOption::LastIterate,
            seed: 0,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn theta_schedule(&self) -> &StepsizeSchedule {
        &self.theta_schedule
    }

    pub fn y_schedule(&self) -> &StepsizeSchedule {
        &self.y_schedule
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn output_option(&self) -> OutputOption {
        self.output_option
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Copy with a different seed; every other field is kept.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// (β_t^min, β_t^max) over the two blocks.
    pub fn beta_bounds(&self, t: u64) -> (f64, f64) {
        let a = self.theta_schedule.at(t);
        let b = self.y_schedule.at(t);
        (a.min(b), a.max(b))
    }
}

#[derive(Debug, Clone)]
pub struct RiskConfigBuilder {
    lambda: f64,
    zeta: f64,
    theta_schedule: StepsizeSchedule,
    y_schedule: StepsizeSchedule,
    episodes: u64,
    output_option: OutputOption,
    seed: u64,
}

impl RiskConfigBuilder {
    pub fn zeta(mut self, zeta: f64) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn episodes(mut self, episodes: u64) -> Self {
        self.episodes = episodes;
        self
    }

    pub fn output_option(mut self, option: OutputOption) -> Self {
        self.output_option = option;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn build(self) -> Result<RiskConfig> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !self.zeta.is_finite() {
            return Err(Error::Config("zeta must be finite".into()));
        }
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        let cfg = RiskConfig {
            lambda: self.lambda,
            zeta: self.zeta,
            theta_schedule: self.theta_schedule,
            y_schedule: self.y_schedule,
            episodes: self.episodes,
            output_option: self.output_option,
            seed: self.seed,
        };
        if let OutputOption::WeightedRandomIterate { lipschitz } = cfg.output_option {
            if !(lipschitz.is_finite() && lipschitz > 0.0) {
                return Err(Error::Config(format!(
                    "Lipschitz constant must be positive, got {lipschitz}"
                )));
            }
            for t in 1..=cfg.episodes {
                let (lo, hi) = cfg.beta_bounds(t);
                check_stepsize_condition(t, lo, hi, lipschitz)?;
            }
        }
        Ok(cfg)
    }
}

/// 2·β_min > L·β_max², the condition under which the weighted output
/// distribution and the finite-sample bound are defined.
pub fn check_stepsize_condition(t: u64, beta_min: f64, beta_max: f64, lipschitz: f64) -> Result<()> {
    let two_beta_min = 2.0 * beta_min;
    let l_beta_max_sq = lipschitz * beta_max * beta_max;
    if two_beta_min > l_beta_max_sq {
        Ok(())
    } else {
        Err(Error::StepsizeCondition {
            t,
            two_beta_min,
            l_beta_max_sq,
        })
    }
}
