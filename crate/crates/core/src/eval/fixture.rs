//! Per-circumstance analysis inputs loaded from CSV.
//!
//! Columns: `circumstance_id, score, training_count, f1_roberta, f1_simple,
//! f1_complex, f1_gemini, f1_llama`. Lines starting with `#` are comments.
//! `-` or an empty cell marks a missing value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::brackets::BracketInput;
use super::strategy::StrategyInput;
use super::EvalError;
use crate::complexity::{select_strategy, PromptStrategy};

pub const FIXTURE_COLUMNS: [&str; 8] = [
    "circumstance_id",
    "score",
    "training_count",
    "f1_roberta",
    "f1_simple",
    "f1_complex",
    "f1_gemini",
    "f1_llama",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub circumstance_id: String,
    pub score: i64,
    pub training_count: Option<u64>,
    pub f1_roberta: Option<f64>,
    pub f1_simple: f64,
    pub f1_complex: f64,
    pub f1_gemini: Option<f64>,
    pub f1_llama: Option<f64>,
}

impl FixtureRow {
    pub fn strategy_input(&self) -> StrategyInput {
        StrategyInput {
            circumstance_id: self.circumstance_id.clone(),
            score: self.score,
            f1_simple: self.f1_simple,
            f1_complex: self.f1_complex,
        }
    }

    pub fn hybrid_f1(&self, threshold: i64) -> f64 {
        match select_strategy(self.score, threshold) {
            PromptStrategy::Complex => self.f1_complex,
            PromptStrategy::Simple => self.f1_simple,
        }
    }

    pub fn bracket_input(&self, threshold: i64) -> BracketInput {
        BracketInput {
            circumstance_id: self.circumstance_id.clone(),
            training_count: self.training_count,
            hybrid_f1: self.hybrid_f1(threshold),
            baseline_f1: self.f1_roberta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisFixture {
    pub rows: Vec<FixtureRow>,
}

fn cell<'a>(record: &'a csv::StringRecord, index: usize) -> Option<&'a str> {
    record.get(index).map(str::trim).filter(|s| !s.is_empty() && *s != "-")
}

fn parse_cell<T: std::str::FromStr>(record: &csv::StringRecord, index: usize, line: u64) -> Result<Option<T>, EvalError> {
    cell(record, index)
        .map(|s| {
            s.parse().map_err(|_| EvalError::Fixture {
                line,
                message: format!("column {} has invalid value {s:?}", FIXTURE_COLUMNS[index]),
            })
        })
        .transpose()
}

fn required<T>(value: Option<T>, index: usize, line: u64) -> Result<T, EvalError> {
    value.ok_or_else(|| EvalError::Fixture {
        line,
        message: format!("column {} is required", FIXTURE_COLUMNS[index]),
    })
}

impl AnalysisFixture {
    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::Fixture {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| EvalError::Fixture {
            line: 1,
            message: e.to_string(),
        })?;
        let found: Vec<&str> = headers.iter().collect();
        if found != FIXTURE_COLUMNS {
            return Err(EvalError::Fixture {
                line: headers.position().map_or(1, |p| p.line()),
                message: format!("expected columns {FIXTURE_COLUMNS:?}, found {found:?}"),
            });
        }

        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| EvalError::Fixture {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let circumstance_id = required(cell(&record, 0).map(str::to_string), 0, line)?;
            rows.push(FixtureRow {
                circumstance_id,
                score: required(parse_cell(&record, 1, line)?, 1, line)?,
                training_count: parse_cell(&record, 2, line)?,
                f1_roberta: parse_cell(&record, 3, line)?,
                f1_simple: required(parse_cell(&record, 4, line)?, 4, line)?,
                f1_complex: required(parse_cell(&record, 5, line)?, 5, line)?,
                f1_gemini: parse_cell(&record, 6, line)?,
                f1_llama: parse_cell(&record, 7, line)?,
            });
        }
        Ok(Self { rows })
    }

    pub fn strategy_inputs(&self) -> Vec<StrategyInput> {
        self.rows.iter().map(FixtureRow::strategy_input).collect()
    }

    pub fn bracket_inputs(&self, threshold: i64) -> Vec<BracketInput> {
        self.rows.iter().map(|r| r.bracket_input(threshold)).collect()
    }

    /// Defined values of an optional F1 column.
    pub fn column(&self, pick: impl Fn(&FixtureRow) -> Option<f64>) -> Vec<f64> {
        self.rows.iter().filter_map(pick).collect()
    }
}
