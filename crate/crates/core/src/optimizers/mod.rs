//! Training algorithms, output-iterate selection and the finite-sample bound.

mod bound;
mod output;
mod run;
mod steps;

pub use bound::{bound_constant, finite_sample_bound, BoundInputs};
pub use output::{output_distribution, select_output, weighted_output_probabilities};
pub use run::{run, IterateHistory, RunOptions, TrainingRun};
pub use steps::{
    mvp_step, mvp_step_observed, rcpg_step, rcpg_step_observed, select_block, sga_step, sga_step_observed, tamar_step,
    vanilla_pg_step, Aux, Block, NoopObserver, OptimizerState, UpdateObserver,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schedule::StepsizeSchedule;

/// Fast/slow stepsizes of the two-time-scale baseline. The fast schedule
/// tracks the return moments and must decay strictly slower than the slow
/// (policy) schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoTimescale {
    fast: StepsizeSchedule,
    slow: StepsizeSchedule,
}

impl TwoTimescale {
    pub const DEFAULT_FAST_EXPONENT: f64 = 0.6;
    pub const DEFAULT_SLOW_EXPONENT: f64 = 0.9;

    pub fn new(fast: StepsizeSchedule, slow: StepsizeSchedule) -> Result<Self> {
        match (fast, slow) {
            (
                StepsizeSchedule::Power { exponent: kf, .. },
                StepsizeSchedule::Power { exponent: ks, .. },
            ) if kf < ks => Ok(Self { fast, slow }),
            _ => Err(Error::Config(
                "two-time-scale schedules must both be power schedules with fast exponent < slow exponent".into(),
            )),
        }
    }

    /// Default exponents 0.6 (fast) and 0.9 (slow) with the given scales.
    pub fn with_scales(fast_scale: f64, slow_scale: f64) -> Result<Self> {
        Self::new(
            StepsizeSchedule::power(fast_scale, Self::DEFAULT_FAST_EXPONENT)?,
            StepsizeSchedule::power(slow_scale, Self::DEFAULT_SLOW_EXPONENT)?,
        )
    }

    pub fn fast(&self) -> &StepsizeSchedule {
        &self.fast
    }

    pub fn slow(&self) -> &StepsizeSchedule {
        &self.slow
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Algorithm {
    /// Cyclic block ascent: y first, then θ with the new y.
    Mvp,
    /// One uniformly chosen block per episode.
    Rcpg,
    /// Both blocks from the old iterate.
    Sga,
    /// Risk-neutral REINFORCE, θ += β R ω.
    VanillaPg,
    /// Two-time-scale mean-variance baseline.
    Tamar(TwoTimescale),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Mvp => "mvp",
            Self::Rcpg => "rcpg",
            Self::Sga => "sga",
            Self::VanillaPg => "pg",
            Self::Tamar(_) => "tamar",
        }
    }
}
