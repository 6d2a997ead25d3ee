use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::wilson::MetricWithCI;
use super::EvalError;
use crate::corpus::EvaluationSample;
use crate::gateway::{Decision, VerdictRecord};

/// How `Unparseable` verdicts enter the confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnparseablePolicy {
    /// Counted as a predicted No.
    #[default]
    AsNo,
    AsYes,
    /// Left out of tp/fp/fn/tn entirely.
    Drop,
}

impl UnparseablePolicy {
    pub fn effective(self, decision: Decision) -> Option<bool> {
        match (decision, self) {
            (Decision::Yes, _) => Some(true),
            (Decision::No, _) => Some(false),
            (Decision::Unparseable, UnparseablePolicy::AsNo) => Some(false),
            (Decision::Unparseable, UnparseablePolicy::AsYes) => Some(true),
            (Decision::Unparseable, UnparseablePolicy::Drop) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub unparseable_count: u64,
}

impl ConfusionMatrix {
    pub fn scored(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircumstanceMetrics {
    pub circumstance_id: String,
    pub matrix: ConfusionMatrix,
    /// `None` when the denominator is zero.
    pub precision: Option<MetricWithCI>,
    pub recall: Option<MetricWithCI>,
    pub f1: Option<MetricWithCI>,
}

/// Checks that every verdict belongs to the sample and appears once.
pub fn pair_verdicts<'a>(
    sample: &EvaluationSample,
    records: &'a [VerdictRecord],
) -> Result<HashMap<&'a str, &'a VerdictRecord>, EvalError> {
    let in_sample: std::collections::HashSet<&str> =
        sample.entries.iter().map(|e| e.narrative_id.as_str()).collect();
    let mut out = HashMap::with_capacity(records.len());
    for r in records {
        if r.circumstance_id != sample.circumstance_id() || !in_sample.contains(r.narrative_id.as_str()) {
            return Err(EvalError::UnexpectedVerdict {
                circumstance_id: r.circumstance_id.clone(),
                narrative_id: r.narrative_id.clone(),
            });
        }
        if out.insert(r.narrative_id.as_str(), r).is_some() {
            return Err(EvalError::DuplicateVerdict(r.narrative_id.clone()));
        }
    }
    Ok(out)
}

pub fn confusion(
    sample: &EvaluationSample,
    verdicts: &HashMap<&str, Decision>,
    policy: UnparseablePolicy,
) -> Result<ConfusionMatrix, EvalError> {
    let missing: Vec<String> = sample
        .entries
        .iter()
        .filter(|e| !verdicts.contains_key(e.narrative_id.as_str()))
        .map(|e| e.narrative_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingVerdict(missing));
    }

    let mut m = ConfusionMatrix::default();
    for entry in &sample.entries {
        let decision = verdicts[entry.narrative_id.as_str()];
        if decision == Decision::Unparseable {
            m.unparseable_count += 1;
        }
        match (policy.effective(decision), entry.label) {
            (Some(true), true) => m.tp += 1,
            (Some(true), false) => m.fp += 1,
            (Some(false), true) => m.fn_ += 1,
            (Some(false), false) => m.tn += 1,
            (None, _) => {}
        }
    }
    Ok(m)
}

/// Precision, recall and F1 with Wilson intervals.
///
/// The F1 interval is Wilson over the effective proportion
/// `tp / (tp + (fp + fn) / 2)` with effective trials `tp + (fp + fn) / 2`.
pub fn metrics(circumstance_id: &str, matrix: ConfusionMatrix, z: f64) -> CircumstanceMetrics {
    let tp = matrix.tp as f64;
    let fp = matrix.fp as f64;
    let fn_ = matrix.fn_ as f64;
    CircumstanceMetrics {
        circumstance_id: circumstance_id.to_string(),
        matrix,
        precision: MetricWithCI::wilson(tp, tp + fp, z),
        recall: MetricWithCI::wilson(tp, tp + fn_, z),
        f1: MetricWithCI::wilson(tp, tp + (fp + fn_) / 2.0, z),
    }
}

/// Unweighted mean of the defined F1 points.
pub fn macro_f1(rows: &[CircumstanceMetrics]) -> Result<f64, EvalError> {
    let defined: Vec<f64> = rows.iter().filter_map(|r| r.f1.map(|m| m.point)).collect();
    mean(&defined).ok_or(EvalError::AllUndefined)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}
