//! Choosing the reported iterate from a training history.

use rand::Rng;

use crate::config::{check_stepsize_condition, OutputOption, RiskConfig};
use crate::error::{Error, Result};
use crate::policy::inverse_cdf;

/// Normalised weights proportional to β_t^min − (L/2)(β_t^max)².
pub fn weighted_output_probabilities(beta_min: &[f64], beta_max: &[f64], lipschitz: f64) -> Result<Vec<f64>> {
    if beta_min.len() != beta_max.len() {
        return Err(Error::Dimension {
            expected: beta_min.len(),
            got: beta_max.len(),
        });
    }
    if beta_min.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut w = Vec::with_capacity(beta_min.len());
    for (i, (&lo, &hi)) in beta_min.iter().zip(beta_max).enumerate() {
        check_stepsize_condition(i as u64 + 1, lo, hi, lipschitz)?;
        w.push(lo - 0.5 * lipschitz * hi * hi);
    }
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// Probability of reporting each of the iterates 1..=n.
pub fn output_distribution(option: OutputOption, cfg: &RiskConfig, n: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let n_us = n as usize;
    match option {
        OutputOption::LastIterate => {
            let mut p = vec![0.0; n_us];
            p[n_us - 1] = 1.0;
            Ok(p)
        }
        OutputOption::UniformRandomIterate => Ok(vec![1.0 / n as f64; n_us]),
        OutputOption::WeightedRandomIterate { lipschitz } => {
            let (lo, hi): (Vec<f64>, Vec<f64>) = (1..=n).map(|t| cfg.beta_bounds(t)).unzip();
            weighted_output_probabilities(&lo, &hi, lipschitz)
        }
    }
}

/// Returns the 1-based index of the reported iterate. Consumes one uniform
/// draw for the random options and none for the last iterate.
pub fn select_output<R: Rng + ?Sized>(option: OutputOption, cfg: &RiskConfig, n: u64, rng: &mut R) -> Result<u64> {
    match option {
        OutputOption::LastIterate => {
            if n == 0 {
                return Err(Error::InsufficientData { needed: 1, got: 0 });
            }
            Ok(n)
        }
        OutputOption::UniformRandomIterate => {
            if n == 0 {
                return Err(Error::InsufficientData { needed: 1, got: 0 });
            }
            Ok(rng.gen_range(1..=n))
        }
        OutputOption::WeightedRandomIterate { .. } => {
            let p = output_distribution(option, cfg, n)?;
            Ok(inverse_cdf(&p, rng.gen::<f64>()) as u64 + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::StepsizeSchedule;

    #[test]
    fn weighted_example() {
        let p = weighted_output_probabilities(&[0.2, 0.1], &[0.2, 0.1], 1.0).unwrap();
        assert!((p[0] - 0.18 / 0.275).abs() < 1e-12);
        assert!((p[1] - 0.095 / 0.275).abs() < 1e-12);
    }

    #[test]
    fn constant_steps_give_uniform_weights() {
        let p = weighted_output_probabilities(&[0.1; 4], &[0.1; 4], 1.0).unwrap();
        for x in p {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn violated_condition_is_rejected() {
        let err = weighted_output_probabilities(&[0.1, 2.5], &[0.1, 2.5], 1.0).unwrap_err();
        assert!(matches!(err, Error::StepsizeCondition { t: 2, .. }));
    }

    #[test]
    fn distribution_from_config() {
        let s = StepsizeSchedule::power(0.2, 1.0).unwrap();
        let cfg = RiskConfig::builder(1.0, s, s).episodes(2).build().unwrap();
        let p = output_distribution(OutputOption::WeightedRandomIterate { lipschitz: 1.0 }, &cfg, 2).unwrap();
        assert!((p[0] - 0.18 / 0.275).abs() < 1e-12);
        let last = output_distribution(OutputOption::LastIterate, &cfg, 2).unwrap();
        assert_eq!(last, vec![0.0, 1.0]);
    }
}
