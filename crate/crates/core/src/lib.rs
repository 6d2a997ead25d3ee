//! Coding-manual driven narrative classification.
//!
//! The pipeline: load a structured coding [`manual`], score each
//! circumstance's CODE-NO examples for [`complexity`], render a simple or
//! complex [`prompt`], classify sampled narratives through a chat provider
//! ([`gateway`]), and evaluate the verdicts ([`eval`]).

pub mod complexity;
pub mod config;
pub mod corpus;
pub mod digest;
pub mod eval;
pub mod gateway;
pub mod jsonl;
pub mod manual;
pub mod prompt;

pub use complexity::{complexity_score, score_example, select_strategy, ComplexityReport, PromptStrategy, Rule, RuleHit};
pub use config::RunConfig;
pub use manual::{load_manual, validate_manual, Circumstance, Manual, Strictness};
pub use prompt::{truncate_narrative, PromptBuilder, RenderedPrompt};
