//! Fidelity metrics of the surrogate against the true disagreement
//! labels, and interpretability metrics of the extracted rule set.

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rules::{rule_coverage, RuleSet};

/// Confusion-matrix metrics with class 1 (disagreement) as the positive
/// class. Precision is undefined when nothing was predicted positive,
/// recall when nothing is actually positive; undefined stays `None`, it
/// is never imputed as 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FidelityReport {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl FidelityReport {
    pub fn n(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

pub fn fidelity_metrics(predicted: &[u8], actual: &[u8]) -> Result<FidelityReport> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: predicted.len(),
            context: "predicted vs actual labels".into(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::TooFewRows { need: 1, got: 0 });
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fn_ = 0usize;
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 0) => tn += 1,
            _ => fn_ += 1,
        }
    }
    let n = predicted.len() as f64;
    let precision = if tp + fp > 0 {
        Some(tp as f64 / (tp + fp) as f64)
    } else {
        None
    };
    let recall = if tp + fn_ > 0 {
        Some(tp as f64 / (tp + fn_) as f64)
    } else {
        None
    };
    Ok(FidelityReport {
        accuracy: (tp + tn) as f64 / n,
        precision,
        recall,
        true_pos: tp,
        false_pos: fp,
        true_neg: tn,
        false_neg: fn_,
    })
}

/// Rule-set interpretability over the whole dataset: the number of rules,
/// the mean rule length, and the mean per-rule coverage. Length and
/// coverage are absent for an empty rule set.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InterpretabilityReport {
    pub num_rules: usize,
    pub mean_length: Option<f64>,
    pub mean_coverage: Option<f64>,
}

pub fn interpretability_metrics(rs: &RuleSet, x_full: &FeatureMatrix) -> InterpretabilityReport {
    let p = rs.n_rules();
    if p == 0 {
        return InterpretabilityReport {
            num_rules: 0,
            mean_length: None,
            mean_coverage: None,
        };
    }
    let mean_length = rs.rules.iter().map(|r| r.length as f64).sum::<f64>() / p as f64;
    let total = x_full.n_rows().max(1) as f64;
    let mean_coverage = rs
        .rules
        .iter()
        .map(|r| match r.covered_rows {
            Some(c) => c as f64 / total,
            None => rule_coverage(r, x_full),
        })
        .sum::<f64>()
        / p as f64;
    InterpretabilityReport {
        num_rules: p,
        mean_length: Some(mean_length),
        mean_coverage: Some(mean_coverage),
    }
}
