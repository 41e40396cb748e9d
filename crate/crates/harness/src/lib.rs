//! Experiment runner for mean-variance policy search: configuration
//! files, grid execution over λ and seeds, and result export.

pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod oracle_check;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{best_lambda, evaluate, run_experiment, ExperimentResults, RunResult, RunStatus, SummaryRow};
pub use export::{export, Format};
