//! Mean-variance policy search for episodic reinforcement learning.
//!
//! The mean-variance objective is rewritten through a quadratic dual
//! variable so that single-episode samples give unbiased block gradients.
//! The crate provides the policy class, the estimators, five training
//! algorithms, several episodic environments, an exact enumeration oracle
//! for small MDPs and return statistics.

pub mod config;
pub mod envs;
pub mod error;
pub mod metrics;
pub mod objective;
pub mod optimizers;
pub mod oracle;
pub mod policy;
pub mod rng;
pub mod schedule;
pub mod types;

pub use config::{OutputOption, RiskConfig};
pub use error::{Error, Result};
pub use optimizers::{run, Algorithm, RunOptions, TrainingRun, TwoTimescale};
pub use policy::{FeatureMap, GibbsPolicy};
pub use schedule::StepsizeSchedule;
pub use types::{EpisodeTrace, Iterate};
