//! Metrics documents and markdown report tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::brackets::{bracket_analysis, BracketAnalysis};
use super::fixture::AnalysisFixture;
use super::metrics::{mean, CircumstanceMetrics, UnparseablePolicy};
use super::strategy::{hybrid_macro_f1, oracle_macro_f1, strategy_analysis, StrategyAnalysis};
use super::wilson::{MetricWithCI, Z_95};
use super::Disagreement;
use crate::complexity::PromptStrategy;

pub const F1_INTERVAL_METHOD: &str =
    "wilson-effective-proportion: Wilson over tp/(tp+(fp+fn)/2) with n = tp+(fp+fn)/2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedCircumstance {
    pub circumstance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<PromptStrategy>,
    pub under_sampled: bool,
    pub sample_positives: usize,
    pub sample_negatives: usize,
    pub metrics: CircumstanceMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub f1_interval_method: String,
    pub z: f64,
    pub unparseable_policy: UnparseablePolicy,
    pub circumstances: Vec<EvaluatedCircumstance>,
    pub macro_f1: Option<f64>,
    /// Circumstances whose F1 is undefined and left out of `macro_f1`.
    pub undefined_f1: Vec<String>,
}

fn num(x: f64) -> String {
    format!("{x:.3}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "–".to_string(), num)
}

fn with_ci(m: &Option<MetricWithCI>) -> String {
    match m {
        Some(m) => format!("{} ({}–{})", num(m.point), num(m.lower), num(m.upper)),
        None => "undefined".to_string(),
    }
}

fn confidence_label(z: f64) -> String {
    if (z - Z_95).abs() < 1e-9 {
        "95% Wilson".to_string()
    } else {
        format!("Wilson, z = {z}")
    }
}

pub fn metrics_markdown(doc: &MetricsDocument) -> String {
    let mut out = String::new();
    writeln!(out, "## Per-circumstance metrics ({})\n", confidence_label(doc.z)).unwrap();
    writeln!(out, "F1 interval method: {}\n", doc.f1_interval_method).unwrap();
    writeln!(
        out,
        "| Circumstance | Strategy | Pos/Neg | TP | FP | FN | TN | Unparseable | Precision | Recall | F1 |"
    )
    .unwrap();
    writeln!(out, "|---|---|---|---:|---:|---:|---:|---:|---|---|---|").unwrap();
    for c in &doc.circumstances {
        let m = &c.metrics.matrix;
        let flag = if c.under_sampled { " (under-sampled)" } else { "" };
        writeln!(
            out,
            "| {} | {} | {}/{}{} | {} | {} | {} | {} | {} | {} | {} | {} |",
            c.circumstance_id,
            c.strategy.map_or("–", PromptStrategy::as_str),
            c.sample_positives,
            c.sample_negatives,
            flag,
            m.tp,
            m.fp,
            m.fn_,
            m.tn,
            m.unparseable_count,
            with_ci(&c.metrics.precision),
            with_ci(&c.metrics.recall),
            with_ci(&c.metrics.f1),
        )
        .unwrap();
    }
    writeln!(out, "\n**Macro F1:** {}", opt(doc.macro_f1)).unwrap();
    if !doc.undefined_f1.is_empty() {
        writeln!(out, "\nExcluded from macro F1 (undefined): {}", doc.undefined_f1.join(", ")).unwrap();
    }
    out
}

pub fn macro_summary_markdown(fixture: &AnalysisFixture, threshold: i64) -> String {
    let rows = fixture.strategy_inputs();
    let line = |approach: &str, model: &str, values: &[f64]| {
        format!("| {approach} | {model} | {} | {} |\n", opt(mean(values)), values.len())
    };
    let mut out = String::from("## Macro F1 by approach\n\n| Approach | Model | Macro F1 | n |\n|---|---|---:|---:|\n");
    out += &format!(
        "| Oracle | primary LLM | {} | {} |\n",
        opt(oracle_macro_f1(&rows).ok()),
        rows.len()
    );
    out += &line("Training-based", "baseline", &fixture.column(|r| r.f1_roberta));
    out += &line("Simple prompt", "primary LLM", &fixture.column(|r| Some(r.f1_simple)));
    out += &line("Complex prompt", "llama", &fixture.column(|r| r.f1_llama));
    out += &line("Complex prompt", "gemini", &fixture.column(|r| r.f1_gemini));
    out += &line("Complex prompt", "primary LLM", &fixture.column(|r| Some(r.f1_complex)));
    out += &format!(
        "| Hybrid prompt | primary LLM | {} | {} |\n",
        opt(hybrid_macro_f1(&rows, threshold).ok()),
        rows.len()
    );
    out
}

pub fn per_circumstance_markdown(fixture: &AnalysisFixture) -> String {
    let mut out = String::from(
        "## F1 by circumstance\n\n| Circumstance | Training | Baseline | Simple | Complex | Gemini | Llama |\n|---|---:|---:|---:|---:|---:|---:|\n",
    );
    for r in &fixture.rows {
        writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r.circumstance_id,
            r.training_count.map_or_else(|| "–".to_string(), |t| t.to_string()),
            opt(r.f1_roberta),
            num(r.f1_simple),
            num(r.f1_complex),
            opt(r.f1_gemini),
            opt(r.f1_llama),
        )
        .unwrap();
    }
    writeln!(
        out,
        "| **Macro F1** | | {} | {} | {} | {} | {} |",
        opt(mean(&fixture.column(|r| r.f1_roberta))),
        opt(mean(&fixture.column(|r| Some(r.f1_simple)))),
        opt(mean(&fixture.column(|r| Some(r.f1_complex)))),
        opt(mean(&fixture.column(|r| r.f1_gemini))),
        opt(mean(&fixture.column(|r| r.f1_llama))),
    )
    .unwrap();
    out
}

pub fn strategy_markdown(analysis: &StrategyAnalysis) -> String {
    let mut out = format!(
        "## Prompt strategy prediction (score > {} predicts C, otherwise S)\n\n| Circumstance | Score | ΔF1 (C−S) | Oracle | Pred | Result | Tie |\n|---|---:|---:|:-:|:-:|:-:|:-:|\n",
        analysis.threshold
    );
    for r in &analysis.rows {
        writeln!(
            out,
            "| {} | {} | {:+.3} | {} | {} | {} | {} |",
            r.circumstance_id,
            r.score,
            r.f1_complex - r.f1_simple,
            r.oracle.letter(),
            r.predicted.letter(),
            if r.correct { "✓" } else { "✗" },
            if r.tie { "tie" } else { "" },
        )
        .unwrap();
    }
    let acc = |a: &super::strategy::Accuracy| match a.value() {
        Some(v) => format!("{}/{} ({:.0}%)", a.correct, a.total, v * 100.0),
        None => "n/a".to_string(),
    };
    writeln!(out, "\n**Accuracy:** {}", acc(&analysis.accuracy_all)).unwrap();
    writeln!(
        out,
        "\n**Accuracy excluding ties (|ΔF1| ≤ {}):** {}",
        analysis.tie_epsilon,
        acc(&analysis.accuracy_non_tie)
    )
    .unwrap();
    for strategy in [PromptStrategy::Complex, PromptStrategy::Simple] {
        if let Some(g) = analysis.group_means(strategy) {
            writeln!(
                out,
                "\nPredicted {} ({}): mean F1 complex {}, simple {}",
                strategy,
                g.n,
                num(g.mean_f1_complex),
                num(g.mean_f1_simple)
            )
            .unwrap();
        }
    }
    out
}

pub fn bracket_markdown(analysis: &BracketAnalysis) -> String {
    let mut out = String::from(
        "## Hybrid vs. baseline by training-set size\n\n| Training instances | n | Hybrid | Baseline |\n|---|---:|---:|---:|\n",
    );
    for r in analysis.rows.iter() {
        writeln!(out, "| {} | {} | {} | {} |", r.bracket, r.n, r.hybrid_wins, r.baseline_wins).unwrap();
    }
    let t = &analysis.total;
    writeln!(out, "| **Total** | {} | {} | {} |", t.n, t.hybrid_wins, t.baseline_wins).unwrap();
    if !analysis.skipped.is_empty() {
        writeln!(out, "\nSkipped (no training count): {}", analysis.skipped.join(", ")).unwrap();
    }
    out
}

pub fn disagreement_markdown(circumstance_id: &str, rows: &[Disagreement]) -> String {
    let mut out = format!("### Disagreements: {circumstance_id}\n\n");
    if rows.is_empty() {
        out.push_str("None.\n");
        return out;
    }
    out.push_str("| Narrative | Label | Decisions | Evidence | Unanimous |\n|---|:-:|---|---|:-:|\n");
    for d in rows {
        let decisions: Vec<String> = d.votes.iter().map(|v| format!("{}: {}", v.run, v.decision)).collect();
        let evidence: Vec<String> = d
            .votes
            .iter()
            .filter_map(|v| v.evidence.as_ref().map(|e| e.replace('|', "\\|")))
            .collect();
        writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            d.narrative_id,
            if d.label { "Yes" } else { "No" },
            decisions.join("; "),
            evidence.join(" / "),
            if d.unanimous { "yes" } else { "" }
        )
        .unwrap();
    }
    out
}

/// All four analysis tables for a fixture.
pub fn fixture_report(fixture: &AnalysisFixture, threshold: i64, tie_epsilon: f64) -> String {
    let strategy = strategy_analysis(&fixture.strategy_inputs(), tie_epsilon, threshold);
    let brackets = bracket_analysis(&fixture.bracket_inputs(threshold));
    [
        macro_summary_markdown(fixture, threshold),
        per_circumstance_markdown(fixture),
        strategy_markdown(&strategy),
        bracket_markdown(&brackets),
    ]
    .join("\n")
}
