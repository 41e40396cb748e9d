use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no actions available in state")]
    NoActions,

    #[error("action {action} is not feasible (state has {available} actions)")]
    InfeasibleAction { action: usize, available: usize },

    #[error("iterate diverged at episode {episode}: {detail}")]
    Divergence { episode: u64, detail: String },

    #[error("stepsize condition violated at t={t}: 2*beta_min={two_beta_min} <= L*beta_max^2={l_beta_max_sq}")]
    StepsizeCondition {
        t: u64,
        two_beta_min: f64,
        l_beta_max_sq: f64,
    },

    #[error("trajectory enumeration exceeded the cap of {cap} trajectories")]
    EnumerationLimit { cap: usize },

    #[error("invalid environment spec: {0}")]
    EnvSpec(String),

    #[error("environment consistency violated: {0}")]
    Consistency(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
