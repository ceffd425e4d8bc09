//! Confusion-matrix metrics and the exact one-sided binomial test.
//!
//! The positive class is "incompatible".

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::data::Label;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("predictions ({predictions}) and labels ({labels}) differ in length")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("no observations")]
    Empty,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no θ₀ gives p = {alpha}")]
    NoRoot { alpha: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

pub fn confusion(predictions: &[Label], labels: &[Label]) -> Result<ConfusionMatrix, StatsError> {
    if predictions.len() != labels.len() {
        return Err(StatsError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (p, l) in predictions.iter().zip(labels) {
        match (p.is_incompatible(), l.is_incompatible()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// A metric is `None` when its denominator is zero; see
/// [`MetricsReport::undefined`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
}

impl MetricsReport {
    /// Names of the metrics whose denominators were zero.
    pub fn undefined(&self) -> Vec<&'static str> {
        [
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("specificity", self.specificity),
            ("f1", self.f1),
        ]
        .into_iter()
        .filter(|(_, v)| v.is_none())
        .map(|(n, _)| n)
        .collect()
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(cm: &ConfusionMatrix, mse: f64) -> MetricsReport {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    MetricsReport {
        mse,
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision,
        recall,
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        f1,
    }
}

/// Mean squared error between raw scores and targets.
pub fn mean_squared_error(scores: &[f64], targets: &[f64]) -> Result<f64, StatsError> {
    if scores.len() != targets.len() {
        return Err(StatsError::LengthMismatch {
            predictions: scores.len(),
            labels: targets.len(),
        });
    }
    if scores.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(scores
        .iter()
        .zip(targets)
        .map(|(s, t)| (s - t).powi(2))
        .sum::<f64>()
        / scores.len() as f64)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `P(X ≥ x0)` for `X ~ Binomial(n, θ₀)`, summing the upper tail in log space.
pub fn binom_pvalue(n: u64, x0: u64, theta0: f64) -> Result<f64, StatsError> {
    if x0 > n {
        return Err(StatsError::DomainError(format!(
            "x0 = {x0} exceeds n = {n}"
        )));
    }
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(StatsError::DomainError(format!(
            "theta0 = {theta0} outside (0, 1)"
        )));
    }
    if x0 == 0 {
        return Ok(1.0);
    }
    let (lt, lq) = (theta0.ln(), (-theta0).ln_1p());
    let terms: Vec<f64> = (x0..=n)
        .map(|i| ln_choose(n, i) + i as f64 * lt + (n - i) as f64 * lq)
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    Ok((top + sum.ln()).exp().min(1.0))
}

/// The θ₀ at which `binom_pvalue(n, x0, θ₀) == alpha`, by bisection.
pub fn theta_at_significance(n: u64, x0: u64, alpha: f64) -> Result<f64, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::DomainError(format!(
            "alpha = {alpha} outside (0, 1)"
        )));
    }
    if x0 == 0 || x0 > n {
        return Err(StatsError::DomainError(format!(
            "need 1 ≤ x0 ≤ n, got x0 = {x0}, n = {n}"
        )));
    }
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    let p_lo = binom_pvalue(n, x0, lo)?;
    let p_hi = binom_pvalue(n, x0, hi)?;
    if !(p_lo <= alpha && alpha <= p_hi) {
        return Err(StatsError::NoRoot { alpha });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = binom_pvalue(n, x0, mid)?;
        if (p - alpha).abs() < 1e-12 {
            return Ok(mid);
        }
        if p < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Compatible as C, Incompatible as I};

    #[test]
    fn confusion_cases() {
        let cm = confusion(&[I, I, C, C], &[I, C, C, I]).unwrap();
        assert_eq!((cm.tp, cm.fp, cm.tn, cm.fn_), (1, 1, 1, 1));
        let right = confusion(&[I, C, C], &[I, C, C]).unwrap();
        assert_eq!((right.fp, right.fn_), (0, 0));
        let flipped = confusion(&[C, I, I], &[I, C, C]).unwrap();
        assert_eq!((flipped.tp, flipped.tn), (0, 0));
        assert_eq!(
            confusion(&[I], &[]),
            Err(StatsError::LengthMismatch {
                predictions: 1,
                labels: 0
            })
        );
        assert_eq!(confusion(&[], &[]), Err(StatsError::Empty));
    }

    #[test]
    fn metrics_fixture() {
        let cm = ConfusionMatrix {
            tp: 3,
            fp: 1,
            tn: 5,
            fn_: 1,
        };
        let m = metrics(&cm, 0.0);
        assert!((m.accuracy.unwrap() - 0.8).abs() < 1e-12);
        assert!((m.precision.unwrap() - 0.75).abs() < 1e-12);
        assert!((m.recall.unwrap() - 0.75).abs() < 1e-12);
        assert!((m.specificity.unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert!((m.f1.unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn undefined_precision() {
        let cm = ConfusionMatrix {
            tp: 0,
            fp: 0,
            tn: 4,
            fn_: 2,
        };
        let m = metrics(&cm, 1.5);
        assert_eq!(m.precision, None);
        assert_eq!(m.f1, None);
        assert!((m.accuracy.unwrap() - 4.0 / 6.0).abs() < 1e-12);
        assert_eq!(m.undefined(), vec!["precision", "f1"]);
    }

    #[test]
    fn perfect_classifier() {
        let cm = confusion(&[I, C, I, C], &[I, C, I, C]).unwrap();
        let m = metrics(&cm, 0.0);
        for v in [m.accuracy, m.precision, m.recall, m.specificity, m.f1] {
            assert_eq!(v, Some(1.0));
        }
    }

    #[test]
    fn binomial_small_cases() {
        assert_eq!(binom_pvalue(10, 0, 0.3).unwrap(), 1.0);
        assert!((binom_pvalue(2, 2, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(binom_pvalue(3, 4, 0.5).is_err());
        assert!(binom_pvalue(3, 1, 1.0).is_err());
    }

    #[test]
    fn binomial_large_n_checkpoints() {
        let p1 = binom_pvalue(1530, 1159, 0.7307).unwrap();
        let p5 = binom_pvalue(1530, 1159, 0.7387).unwrap();
        assert!((p1 - 0.01).abs() <= 0.003, "{p1}");
        assert!((p5 - 0.05).abs() <= 0.008, "{p5}");
        let t1 = theta_at_significance(1530, 1159, 0.01).unwrap();
        let t5 = theta_at_significance(1530, 1159, 0.05).unwrap();
        assert!((t1 - 0.7307).abs() <= 0.003, "{t1}");
        assert!((t5 - 0.7387).abs() <= 0.003, "{t5}");
        for (t, a) in [(t1, 0.01), (t5, 0.05)] {
            assert!((binom_pvalue(1530, 1159, t).unwrap() - a).abs() < 1e-8);
        }
    }

    #[test]
    fn inversion_errors() {
        assert!(theta_at_significance(10, 5, 0.0).is_err());
        assert!(theta_at_significance(10, 0, 0.5).is_err());
        assert!(theta_at_significance(10, 11, 0.5).is_err());
    }

    #[test]
    fn mse_helper() {
        assert_eq!(mean_squared_error(&[0.0, 10.0], &[0.0, 0.0]).unwrap(), 50.0);
        assert!(mean_squared_error(&[], &[]).is_err());
    }
}
