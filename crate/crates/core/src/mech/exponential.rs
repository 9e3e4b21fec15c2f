use rand::Rng;

use crate::error::{invalid_input, invalid_param, Result};
use crate::rng::open_unit;
use crate::scalar::log_sum_exp;

/// Normalized log-probabilities of a finite-output mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMechanism {
    log_pmf: Vec<f64>,
}

impl FiniteMechanism {
    /// Normalizes `log_weights` in log space.
    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(invalid_input("mechanism needs at least one outcome"));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(invalid_input("log weights must be finite or -inf"));
        }
        let z = log_sum_exp(&log_weights);
        if z == f64::NEG_INFINITY {
            return Err(invalid_input("all outcomes have zero weight"));
        }
        Ok(Self { log_pmf: log_weights.into_iter().map(|w| w - z).collect() })
    }

    pub fn log_pmf(&self) -> &[f64] {
        &self.log_pmf
    }

    pub fn len(&self) -> usize {
        self.log_pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_pmf.is_empty()
    }

    /// Index drawn by inverse CDF over outcomes in order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = open_unit(rng);
        let mut acc = 0.0;
        for (i, lp) in self.log_pmf.iter().enumerate() {
            acc += lp.exp();
            if u < acc {
                return i;
            }
        }
        // rounding left a sliver above the last cumulative value
        self.log_pmf.iter().rposition(|lp| *lp > f64::NEG_INFINITY).expect("some outcome has mass")
    }
}

/// Log-pmf of the exponential mechanism, `∝ exp(coefficient · score)`.
pub fn exponential_log_pmf(scores: &[f64], coefficient: f64) -> Result<FiniteMechanism> {
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(invalid_input("scores must be finite"));
    }
    if !(coefficient >= 0.0 && coefficient.is_finite()) {
        return Err(invalid_param(format!("coefficient must be nonnegative and finite, got {coefficient}")));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    FiniteMechanism::from_log_weights(scores.iter().map(|s| coefficient * (s - max)).collect())
}

/// Sample a candidate with probability `∝ exp(coefficient · score(c))`.
pub fn exponential_mechanism<'a, C, R: Rng + ?Sized>(
    candidates: &'a [C],
    score: impl Fn(&C) -> f64,
    coefficient: f64,
    rng: &mut R,
) -> Result<&'a C> {
    if candidates.is_empty() {
        return Err(invalid_input("no candidates"));
    }
    let scores: Vec<f64> = candidates.iter().map(score).collect();
    let mech = exponential_log_pmf(&scores, coefficient)?;
    Ok(&candidates[mech.sample(rng)])
}
