//! Experiment configuration files.

use std::path::Path;

use mvpg::envs::{ChainSpec, OptionParams, PortfolioParams, StoppingParams};
use mvpg::optimizers::{Algorithm, TwoTimescale};
use mvpg::{OutputOption, RiskConfig, StepsizeSchedule};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvName {
    Option,
    Stopping,
    Portfolio,
    Chain,
}

impl EnvName {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Option => "option",
            Self::Stopping => "stopping",
            Self::Portfolio => "portfolio",
            Self::Chain => "chain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgoName {
    Mvp,
    Rcpg,
    Sga,
    Pg,
    Tamar,
}

impl AlgoName {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Mvp => "mvp",
            Self::Rcpg => "rcpg",
            Self::Sga => "sga",
            Self::Pg => "pg",
            Self::Tamar => "tamar",
        }
    }

    /// Whether λ changes the updates; vanilla PG ignores it.
    pub fn uses_lambda(&self) -> bool {
        !matches!(self, Self::Pg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoTimescaleConfig {
    pub fast: StepsizeSchedule,
    pub slow: StepsizeSchedule,
}

impl Default for TwoTimescaleConfig {
    fn default() -> Self {
        Self {
            fast: StepsizeSchedule::Power {
                scale: 1.0,
                exponent: TwoTimescale::DEFAULT_FAST_EXPONENT,
            },
            slow: StepsizeSchedule::Power {
                scale: 1.0,
                exponent: TwoTimescale::DEFAULT_SLOW_EXPONENT,
            },
        }
    }
}

/// Chain MDP selection: a built-in by name or an explicit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChainConfig {
    Builtin { builtin: String },
    Explicit(ChainSpec),
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self::Builtin {
            builtin: "three_state_chain".into(),
        }
    }
}

impl ChainConfig {
    pub fn spec(&self) -> Result<ChainSpec> {
        match self {
            Self::Explicit(spec) => Ok(spec.clone()),
            Self::Builtin { builtin } => match builtin.as_str() {
                "equal_mean_bandit" => Ok(ChainSpec::equal_mean_bandit()),
                "three_state_chain" => Ok(ChainSpec::three_state_chain()),
                other => Err(HarnessError::Config(format!("unknown built-in chain {other:?}"))),
            },
        }
    }
}

fn default_episodes() -> u64 {
    100_000
}

fn default_eval_episodes() -> usize {
    10_000
}

fn default_alphas() -> Vec<f64> {
    vec![0.05]
}

fn default_bins() -> usize {
    20
}

fn default_temperature() -> f64 {
    1.0
}

fn default_theta_stepsize() -> StepsizeSchedule {
    StepsizeSchedule::Constant { value: 0.01 }
}

fn default_y_stepsize() -> StepsizeSchedule {
    StepsizeSchedule::Constant { value: 0.01 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvName,
    pub algorithm: AlgoName,
    pub lambda_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_episodes")]
    pub episodes: u64,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default)]
    pub zeta: f64,
    #[serde(default = "default_theta_stepsize")]
    pub theta_stepsize: StepsizeSchedule,
    #[serde(default = "default_y_stepsize")]
    pub y_stepsize: StepsizeSchedule,
    #[serde(default)]
    pub output: OutputOption,
    #[serde(default)]
    pub two_timescale: TwoTimescaleConfig,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub snapshot_stride: Option<u64>,
    /// Width of the windows averaged into the stored learning curve;
    /// defaults to max(1, N/1000).
    #[serde(default)]
    pub curve_window: Option<u64>,
    #[serde(default = "default_alphas")]
    pub cvar_alphas: Vec<f64>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    /// Wall-clock times are written as 0 unless enabled, so reruns are
    /// byte-identical.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub option: OptionParams,
    #[serde(default)]
    pub stopping: StoppingParams,
    #[serde(default)]
    pub portfolio: PortfolioParams,
    #[serde(default)]
    pub chain: ChainConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seeds must not be empty".into()));
        }
        if self.lambda_grid.is_empty() {
            return Err(HarnessError::Config("lambda_grid must not be empty".into()));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(HarnessError::Config(format!("lambda values must be positive, got {l}")));
        }
        if self.eval_episodes < 2 {
            return Err(HarnessError::Config("eval_episodes must be at least 2".into()));
        }
        if self.histogram_bins == 0 {
            return Err(HarnessError::Config("histogram_bins must be at least 1".into()));
        }
        if let Some(a) = self.cvar_alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(HarnessError::Config(format!("CVaR levels must lie in (0, 1], got {a}")));
        }
        if self.curve_window == Some(0) || self.snapshot_stride == Some(0) {
            return Err(HarnessError::Config("strides must be at least 1".into()));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(HarnessError::Config("temperature must be positive".into()));
        }
        self.algorithm()?;
        for &lambda in &self.lambda_grid {
            self.risk_config(lambda, self.seeds[0])?;
        }
        Ok(())
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        Ok(match self.algorithm {
            AlgoName::Mvp => Algorithm::Mvp,
            AlgoName::Rcpg => Algorithm::Rcpg,
            AlgoName::Sga => Algorithm::Sga,
            AlgoName::Pg => Algorithm::VanillaPg,
            AlgoName::Tamar => Algorithm::Tamar(TwoTimescale::new(self.two_timescale.fast, self.two_timescale.slow)?),
        })
    }

    /// λ values actually run; vanilla PG is run once per seed.
    pub fn effective_lambdas(&self) -> Vec<f64> {
        if self.algorithm.uses_lambda() {
            self.lambda_grid.clone()
        } else {
            vec![self.lambda_grid[0]]
        }
    }

    pub fn risk_config(&self, lambda: f64, seed: u64) -> Result<RiskConfig> {
        Ok(RiskConfig::builder(lambda, self.theta_stepsize, self.y_stepsize)
            .zeta(self.zeta)
            .episodes(self.episodes)
            .output_option(self.output)
            .seed(seed)
            .build()?)
    }

    pub fn curve_window(&self) -> u64 {
        self.curve_window.unwrap_or((self.episodes / 1000).max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
environment = "option"
algorithm = "mvp"
lambda_grid = [0.5]
seeds = [1, 2]
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.episodes, 100_000);
        assert_eq!(cfg.eval_episodes, 10_000);
        assert_eq!(cfg.output, OutputOption::LastIterate);
        assert_eq!(cfg.option, OptionParams::default());
        assert_eq!(cfg.curve_window(), 100);
    }

    #[test]
    fn parameter_names_as_keys() {
        let text = format!(
            "{MINIMAL}\n[option]\nK_put = 0.9\ntau = 10\n[theta_stepsize]\nkind = \"power\"\nscale = 0.5\nexponent = 0.75\n"
        );
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.option.w_put, 0.9);
        assert_eq!(cfg.option.tau, 10);
        assert_eq!(cfg.theta_stepsize, StepsizeSchedule::power(0.5, 0.75).unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            MINIMAL.replace("seeds = [1, 2]", "seeds = []"),
            MINIMAL.replace("[0.5]", "[]"),
            MINIMAL.replace("[0.5]", "[-1.0]"),
            MINIMAL.replace("\"mvp\"", "\"dqn\""),
            format!("{MINIMAL}\nunknown_key = 3\n"),
            format!("{MINIMAL}\n[y_stepsize]\nkind = \"power\"\nscale = 1.0\nexponent = 0.5\n"),
        ] {
            assert!(ExperimentConfig::from_toml_str(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn weighted_output_and_chain_table() {
        let text = r#"
environment = "chain"
algorithm = "rcpg"
lambda_grid = [1.0]
seeds = [0]
episodes = 10
output = { weighted_random_iterate = { lipschitz = 1.0 } }

[chain]
initial = [1.0]
horizon = 1
table = [[[{ prob = 1.0, reward = 1.0 }]]]
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert!(matches!(cfg.output, OutputOption::WeightedRandomIterate { .. }));
        assert_eq!(cfg.chain.spec().unwrap().horizon, 1);
    }
}
