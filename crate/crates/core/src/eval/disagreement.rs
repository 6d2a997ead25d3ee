use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::metrics::UnparseablePolicy;
use super::EvalError;
use crate::corpus::EvaluationSample;
use crate::gateway::{Decision, VerdictRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunVote {
    pub run: String,
    pub decision: Decision,
    pub evidence: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub narrative_id: String,
    pub label: bool,
    /// One vote per run, in run order.
    pub votes: Vec<RunVote>,
    /// Set when two or more runs were supplied and all of them contradict the label.
    pub unanimous: bool,
}

/// Entries where at least one run's effective prediction contradicts the
/// label, in sample order.
pub fn disagreement_report(
    sample: &EvaluationSample,
    runs: &[(String, Vec<VerdictRecord>)],
    policy: UnparseablePolicy,
) -> Result<Vec<Disagreement>, EvalError> {
    let indexed: Vec<HashMap<&str, &VerdictRecord>> = runs
        .iter()
        .map(|(_, records)| super::metrics::pair_verdicts(sample, records))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    for entry in &sample.entries {
        let mut votes = Vec::with_capacity(runs.len());
        let mut contradicting = 0;
        for ((name, _), index) in runs.iter().zip(&indexed) {
            let record = index
                .get(entry.narrative_id.as_str())
                .ok_or_else(|| EvalError::MissingVerdict(vec![entry.narrative_id.clone()]))?;
            if policy.effective(record.decision).is_some_and(|p| p != entry.label) {
                contradicting += 1;
            }
            votes.push(RunVote {
                run: name.clone(),
                decision: record.decision,
                evidence: record.evidence.clone(),
            });
        }
        if contradicting > 0 {
            out.push(Disagreement {
                narrative_id: entry.narrative_id.clone(),
                label: entry.label,
                votes,
                unanimous: runs.len() >= 2 && contradicting == runs.len(),
            });
        }
    }
    Ok(out)
}
