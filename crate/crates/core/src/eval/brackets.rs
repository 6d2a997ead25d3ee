//! Hybrid vs. baseline wins grouped by positive training-instance count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bracket {
    Under500,
    To2000,
    To5000,
    To15000,
    Over15000,
}

impl Bracket {
    pub const ALL: [Bracket; 5] = [
        Bracket::Under500,
        Bracket::To2000,
        Bracket::To5000,
        Bracket::To15000,
        Bracket::Over15000,
    ];

    /// `<500`, then upper-inclusive ranges, then `>15,000`.
    pub fn of(training_count: u64) -> Self {
        match training_count {
            0..=499 => Bracket::Under500,
            500..=2_000 => Bracket::To2000,
            2_001..=5_000 => Bracket::To5000,
            5_001..=15_000 => Bracket::To15000,
            _ => Bracket::Over15000,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bracket::Under500 => "<500",
            Bracket::To2000 => "500–2,000",
            Bracket::To5000 => "2,000–5,000",
            Bracket::To15000 => "5,000–15,000",
            Bracket::Over15000 => ">15,000",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketInput {
    pub circumstance_id: String,
    pub training_count: Option<u64>,
    pub hybrid_f1: f64,
    /// `None` when the baseline could not be evaluated.
    pub baseline_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketRow {
    pub bracket: String,
    pub n: usize,
    pub hybrid_wins: usize,
    pub baseline_wins: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketAnalysis {
    /// Always five rows, smallest bracket first.
    pub rows: Vec<BracketRow>,
    pub total: BracketRow,
    /// Circumstances without a training count.
    pub skipped: Vec<String>,
}

/// Hybrid wins on a strictly higher point estimate or an absent baseline;
/// exact equality goes to the baseline.
pub fn hybrid_wins(hybrid_f1: f64, baseline_f1: Option<f64>) -> bool {
    baseline_f1.is_none_or(|b| hybrid_f1 > b)
}

pub fn bracket_analysis(rows: &[BracketInput]) -> BracketAnalysis {
    let mut table: Vec<BracketRow> = Bracket::ALL
        .iter()
        .map(|b| BracketRow {
            bracket: b.label().to_string(),
            n: 0,
            hybrid_wins: 0,
            baseline_wins: 0,
        })
        .collect();
    let mut skipped = Vec::new();
    for r in rows {
        let Some(count) = r.training_count else {
            skipped.push(r.circumstance_id.clone());
            continue;
        };
        let slot = &mut table[Bracket::of(count) as usize];
        slot.n += 1;
        if hybrid_wins(r.hybrid_f1, r.baseline_f1) {
            slot.hybrid_wins += 1;
        } else {
            slot.baseline_wins += 1;
        }
    }
    let total = BracketRow {
        bracket: "Total".into(),
        n: table.iter().map(|r| r.n).sum(),
        hybrid_wins: table.iter().map(|r| r.hybrid_wins).sum(),
        baseline_wins: table.iter().map(|r| r.baseline_wins).sum(),
    };
    BracketAnalysis {
        rows: table,
        total,
        skipped,
    }
}
