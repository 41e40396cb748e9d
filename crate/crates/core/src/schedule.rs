use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-episode stepsize β_t.
///
/// The power form `c · t^{-κ}` with κ in (0.5, 1] has a divergent sum and a
/// convergent sum of squares; the constructor refuses other exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawSchedule")]
pub enum StepsizeSchedule {
    Constant { value: f64 },
    Power { scale: f64, exponent: f64 },
}

impl StepsizeSchedule {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Config(format!(
                "constant stepsize must be positive, got {value}"
            )));
        }
        Ok(Self::Constant { value })
    }

    pub fn power(scale: f64, exponent: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!(
                "power stepsize scale must be positive, got {scale}"
            )));
        }
        if !(exponent > 0.5 && exponent <= 1.0) {
            return Err(Error::Config(format!(
                "power stepsize exponent must lie in (0.5, 1], got {exponent}"
            )));
        }
        Ok(Self::Power { scale, exponent })
    }

    /// β_t for a 1-based episode index.
    pub fn at(&self, t: u64) -> f64 {
        debug_assert!(t >= 1, "episode index is 1-based");
        match *self {
            Self::Constant { value } => value,
            Self::Power { scale, exponent } => scale * (t as f64).powf(-exponent),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant { .. })
    }
}

/// Free function form of [`StepsizeSchedule::at`].
pub fn schedule_at(s: &StepsizeSchedule, t: u64) -> f64 {
    s.at(t)
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawSchedule {
    Constant { value: f64 },
    Power { scale: f64, exponent: f64 },
}

impl TryFrom<RawSchedule> for StepsizeSchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        match raw {
            RawSchedule::Constant { value } => Self::constant(value),
            RawSchedule::Power { scale, exponent } => Self::power(scale, exponent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_constant() {
        let s = StepsizeSchedule::constant(0.1).unwrap();
        assert_eq!(schedule_at(&s, 7), 0.1);
    }

    #[test]
    fn harmonic() {
        let s = StepsizeSchedule::power(1.0, 1.0).unwrap();
        assert_eq!(s.at(4), 0.25);
    }

    #[test]
    fn three_quarter_power() {
        let s = StepsizeSchedule::power(2.0, 0.75).unwrap();
        assert!((s.at(16) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StepsizeSchedule::constant(0.0).is_err());
        assert!(StepsizeSchedule::constant(-1.0).is_err());
        assert!(StepsizeSchedule::power(1.0, 0.5).is_err());
        assert!(StepsizeSchedule::power(1.0, 1.1).is_err());
        assert!(StepsizeSchedule::power(0.0, 0.75).is_err());
        assert!(StepsizeSchedule::power(1.0, 0.75).is_ok());
    }
}
