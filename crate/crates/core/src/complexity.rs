//! Complexity Score over a circumstance's CODE-NO examples.
//!
//! Each negative example is checked against four lexical rules:
//!
//! | rule                | delta | fires when                                           |
//! |---------------------|-------|------------------------------------------------------|
//! | `POSITIVE_AND_BUT`  | +3    | a positive word and the word "but" both occur        |
//! | `POSITIVE_ONLY`     | +2    | a positive word occurs without "but"                 |
//! | `CATEGORY_REDIRECT` | +1    | the phrase "use that" or "use other" occurs          |
//! | `SIMPLE_ABSENCE`    | -1    | first word is "no" and the example has < 5 words     |
//!
//! The first two are mutually exclusive; the last two stack with either.
//! Matching is case-insensitive. Words are maximal alphanumeric runs, so
//! "wash" never matches "was". The redirect phrases are plain substring
//! checks and the word count for `SIMPLE_ABSENCE` splits on whitespace.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::manual::Circumstance;

pub const POSITIVE_WORDS: [&str; 11] = [
    "used",
    "had",
    "was",
    "moved",
    "argued",
    "problems",
    "history",
    "mentioned",
    "occurred",
    "abuse",
    "stressor",
];

pub const REDIRECT_PHRASES: [&str; 2] = ["use that", "use other"];

pub const DEFAULT_THRESHOLD: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    PositiveAndBut,
    PositiveOnly,
    CategoryRedirect,
    SimpleAbsence,
}

impl Rule {
    pub fn delta(self) -> i64 {
        match self {
            Rule::PositiveAndBut => 3,
            Rule::PositiveOnly => 2,
            Rule::CategoryRedirect => 1,
            Rule::SimpleAbsence => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::PositiveAndBut => "POSITIVE_AND_BUT",
            Rule::PositiveOnly => "POSITIVE_ONLY",
            Rule::CategoryRedirect => "CATEGORY_REDIRECT",
            Rule::SimpleAbsence => "SIMPLE_ABSENCE",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleHit {
    pub rule: Rule,
    pub delta: i64,
    pub example_index: usize,
}

impl RuleHit {
    fn new(rule: Rule, example_index: usize) -> Self {
        Self {
            rule,
            delta: rule.delta(),
            example_index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptStrategy {
    Simple,
    Complex,
}

impl PromptStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptStrategy::Simple => "simple",
            PromptStrategy::Complex => "complex",
        }
    }

    /// Single-letter code used in analysis tables.
    pub fn letter(self) -> char {
        match self {
            PromptStrategy::Simple => 'S',
            PromptStrategy::Complex => 'C',
        }
    }
}

impl fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub circumstance_id: String,
    pub total_score: i64,
    pub hits: Vec<RuleHit>,
    pub strategy: PromptStrategy,
    pub threshold: i64,
}

fn words(lowered: &str) -> impl Iterator<Item = &str> {
    lowered.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty())
}

/// Rule hits for a single example; `example_index` is stamped on every hit.
pub fn score_example_at(example: &str, example_index: usize) -> Vec<RuleHit> {
    let lowered = example.to_lowercase();
    let mut has_positive = false;
    let mut has_but = false;
    for w in words(&lowered) {
        has_positive |= POSITIVE_WORDS.contains(&w);
        has_but |= w == "but";
    }

    let mut hits = Vec::new();
    if has_positive && has_but {
        hits.push(RuleHit::new(Rule::PositiveAndBut, example_index));
    } else if has_positive {
        hits.push(RuleHit::new(Rule::PositiveOnly, example_index));
    }
    if REDIRECT_PHRASES.iter().any(|p| lowered.contains(p)) {
        hits.push(RuleHit::new(Rule::CategoryRedirect, example_index));
    }
    let starts_with_no = words(&lowered).next() == Some("no");
    if starts_with_no && lowered.split_whitespace().count() < 5 {
        hits.push(RuleHit::new(Rule::SimpleAbsence, example_index));
    }
    hits
}

pub fn score_example(example: &str) -> Vec<RuleHit> {
    score_example_at(example, 0)
}

/// Sums rule deltas over `examples_no`; `examples_yes` never contribute.
/// The returned report carries the strategy at `threshold`.
pub fn complexity_score(circumstance: &Circumstance, threshold: i64) -> ComplexityReport {
    let hits: Vec<RuleHit> = circumstance
        .examples_no
        .iter()
        .enumerate()
        .flat_map(|(i, ex)| score_example_at(ex, i))
        .collect();
    let total_score = hits.iter().map(|h| h.delta).sum();
    ComplexityReport {
        circumstance_id: circumstance.id.clone(),
        total_score,
        hits,
        strategy: select_strategy(total_score, threshold),
        threshold,
    }
}

/// Complex strictly above the threshold.
pub fn select_strategy(score: i64, threshold: i64) -> PromptStrategy {
    if score > threshold {
        PromptStrategy::Complex
    } else {
        PromptStrategy::Simple
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules(text: &str) -> Vec<Rule> {
        score_example(text).into_iter().map(|h| h.rule).collect()
    }

    fn circumstance(no: &[&str]) -> Circumstance {
        Circumstance {
            id: "x".into(),
            name: "X".into(),
            definition: String::new(),
            guidance: String::new(),
            examples_yes: vec!["Victim had problems but argued".into()],
            examples_no: no.iter().map(|s| s.to_string()).collect(),
            training_positive_count: None,
        }
    }

    #[test]
    fn worked_examples() {
        assert_eq!(rules("Argued constantly but no specific incident"), [Rule::PositiveAndBut]);
        assert_eq!(rules("Victim had financial difficulties"), [Rule::PositiveOnly]);
        assert_eq!(rules("No financial difficulties."), [Rule::SimpleAbsence]);
        assert_eq!(rules(""), []);
    }

    #[test]
    fn redirect_stacks_with_positive() {
        let hits = score_example("Victim had a dispute but use other category");
        assert_eq!(
            hits.iter().map(|h| h.rule).collect::<Vec<_>>(),
            [Rule::PositiveAndBut, Rule::CategoryRedirect]
        );
        assert_eq!(hits.iter().map(|h| h.delta).sum::<i64>(), 4);
    }

    #[test]
    fn positive_and_absence_stack() {
        let hits = score_example("No history of abuse");
        assert_eq!(
            hits.iter().map(|h| h.rule).collect::<Vec<_>>(),
            [Rule::PositiveOnly, Rule::SimpleAbsence]
        );
        assert_eq!(hits.iter().map(|h| h.delta).sum::<i64>(), 1);
    }

    #[test]
    fn word_boundaries() {
        assert_eq!(rules("Wash the dishes"), []);
        assert_eq!(rules("Rebutted the claim"), []);
        assert_eq!(rules("history: long"), [Rule::PositiveOnly]);
        assert_eq!(rules("Nothing found."), []);
        assert_eq!(rules("No mention at all of it"), []);
        assert_eq!(rules("No mention at all"), [Rule::SimpleAbsence]);
    }

    #[test]
    fn redirect_is_substring() {
        assert_eq!(rules("Refuse that option"), [Rule::CategoryRedirect]);
        assert_eq!(rules("USE OTHER"), [Rule::CategoryRedirect]);
    }

    #[test]
    fn circumstance_totals() {
        assert_eq!(complexity_score(&circumstance(&[]), 2).total_score, 0);
        let report = complexity_score(
            &circumstance(&["Victim had financial difficulties", "No financial difficulties."]),
            2,
        );
        assert_eq!(report.total_score, 1);
        assert_eq!(report.hits[1].example_index, 1);
        assert_eq!(report.strategy, PromptStrategy::Simple);
        let report = complexity_score(&circumstance(&["Argued constantly but no specific incident"]), 2);
        assert_eq!(report.total_score, 3);
        assert_eq!(report.strategy, PromptStrategy::Complex);
    }

    #[test]
    fn threshold_is_strict() {
        assert_eq!(select_strategy(5, 2), PromptStrategy::Complex);
        assert_eq!(select_strategy(3, 2), PromptStrategy::Complex);
        assert_eq!(select_strategy(2, 2), PromptStrategy::Simple);
        assert_eq!(select_strategy(-1, 2), PromptStrategy::Simple);
        assert_eq!(select_strategy(4, 4), PromptStrategy::Simple);
    }
}
