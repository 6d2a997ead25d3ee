//! Confusion matrices, Wilson intervals, macro-F1, strategy and bracket
//! analyses, and report rendering.

mod brackets;
mod disagreement;
mod fixture;
mod metrics;
pub mod report;
mod strategy;
mod wilson;

use thiserror::Error;

pub use brackets::{bracket_analysis, hybrid_wins, Bracket, BracketAnalysis, BracketInput, BracketRow};
pub use disagreement::{disagreement_report, Disagreement, RunVote};
pub use fixture::{AnalysisFixture, FixtureRow, FIXTURE_COLUMNS};
pub use metrics::{
    confusion, macro_f1, mean, metrics, pair_verdicts, CircumstanceMetrics, ConfusionMatrix, UnparseablePolicy,
};
pub use strategy::{
    hybrid_macro_f1, is_tie, oracle_macro_f1, oracle_strategy, strategy_analysis, Accuracy, GroupMeans,
    StrategyAnalysis, StrategyAnalysisRow, StrategyInput, DEFAULT_TIE_EPSILON,
};
pub use wilson::{wilson_interval, MetricWithCI, Z_95};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("Wilson interval needs a positive trial count, got {0}")]
    NonPositiveTrials(f64),
    #[error("successes {successes} outside [0, {n}]")]
    SuccessesOutOfRange { successes: f64, n: f64 },
    #[error("missing verdicts for narratives: {}", .0.join(", "))]
    MissingVerdict(Vec<String>),
    #[error("verdict for {circumstance_id}/{narrative_id} does not belong to the sample")]
    UnexpectedVerdict {
        circumstance_id: String,
        narrative_id: String,
    },
    #[error("more than one verdict for narrative {0}")]
    DuplicateVerdict(String),
    #[error("no circumstance has a defined F1")]
    AllUndefined,
    #[error("no rows to analyze")]
    EmptyInput,
    #[error("analysis fixture line {line}: {message}")]
    Fixture { line: u64, message: String },
}
