//! Oracle vs. predicted prompt strategy per circumstance, and the macro-F1
//! of the hybrid and oracle selections.

use serde::{Deserialize, Serialize};

use super::metrics::mean;
use super::EvalError;
use crate::complexity::{select_strategy, PromptStrategy};

pub const DEFAULT_TIE_EPSILON: f64 = 0.02;

// F1 values are decimal fractions; a difference like .971 - .952 must not
// land on the wrong side of the epsilon because of binary rounding.
const TIE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyInput {
    pub circumstance_id: String,
    pub score: i64,
    pub f1_simple: f64,
    pub f1_complex: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyAnalysisRow {
    pub circumstance_id: String,
    pub score: i64,
    pub f1_simple: f64,
    pub f1_complex: f64,
    pub oracle: PromptStrategy,
    pub predicted: PromptStrategy,
    pub correct: bool,
    pub tie: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyAnalysis {
    pub rows: Vec<StrategyAnalysisRow>,
    pub accuracy_all: Accuracy,
    pub accuracy_non_tie: Accuracy,
    pub tie_epsilon: f64,
    pub threshold: i64,
}

/// Mean simple/complex F1 within the group predicted to need `strategy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupMeans {
    pub n: usize,
    pub mean_f1_simple: f64,
    pub mean_f1_complex: f64,
}

impl StrategyAnalysis {
    pub fn group_means(&self, strategy: PromptStrategy) -> Option<GroupMeans> {
        let group: Vec<&StrategyAnalysisRow> = self.rows.iter().filter(|r| r.predicted == strategy).collect();
        let simple: Vec<f64> = group.iter().map(|r| r.f1_simple).collect();
        let complex: Vec<f64> = group.iter().map(|r| r.f1_complex).collect();
        Some(GroupMeans {
            n: group.len(),
            mean_f1_simple: mean(&simple)?,
            mean_f1_complex: mean(&complex)?,
        })
    }
}

/// Strictly better complex F1 makes the oracle Complex; exact equality
/// prefers the cheaper Simple prompt.
pub fn oracle_strategy(f1_simple: f64, f1_complex: f64) -> PromptStrategy {
    if f1_complex > f1_simple {
        PromptStrategy::Complex
    } else {
        PromptStrategy::Simple
    }
}

pub fn is_tie(f1_simple: f64, f1_complex: f64, tie_epsilon: f64) -> bool {
    (f1_complex - f1_simple).abs() <= tie_epsilon + TIE_SLACK
}

pub fn strategy_analysis(rows: &[StrategyInput], tie_epsilon: f64, threshold: i64) -> StrategyAnalysis {
    let rows: Vec<StrategyAnalysisRow> = rows
        .iter()
        .map(|r| {
            let oracle = oracle_strategy(r.f1_simple, r.f1_complex);
            let predicted = select_strategy(r.score, threshold);
            StrategyAnalysisRow {
                circumstance_id: r.circumstance_id.clone(),
                score: r.score,
                f1_simple: r.f1_simple,
                f1_complex: r.f1_complex,
                oracle,
                predicted,
                correct: oracle == predicted,
                tie: is_tie(r.f1_simple, r.f1_complex, tie_epsilon),
            }
        })
        .collect();
    let accuracy_all = Accuracy {
        correct: rows.iter().filter(|r| r.correct).count(),
        total: rows.len(),
    };
    let accuracy_non_tie = Accuracy {
        correct: rows.iter().filter(|r| !r.tie && r.correct).count(),
        total: rows.iter().filter(|r| !r.tie).count(),
    };
    StrategyAnalysis {
        rows,
        accuracy_all,
        accuracy_non_tie,
        tie_epsilon,
        threshold,
    }
}

/// Macro-F1 when each circumstance uses its score-selected prompt.
pub fn hybrid_macro_f1(rows: &[StrategyInput], threshold: i64) -> Result<f64, EvalError> {
    let picked: Vec<f64> = rows
        .iter()
        .map(|r| match select_strategy(r.score, threshold) {
            PromptStrategy::Complex => r.f1_complex,
            PromptStrategy::Simple => r.f1_simple,
        })
        .collect();
    mean(&picked).ok_or(EvalError::EmptyInput)
}

/// Macro-F1 of the hindsight-best prompt per circumstance.
pub fn oracle_macro_f1(rows: &[StrategyInput]) -> Result<f64, EvalError> {
    let best: Vec<f64> = rows.iter().map(|r| r.f1_simple.max(r.f1_complex)).collect();
    mean(&best).ok_or(EvalError::EmptyInput)
}
