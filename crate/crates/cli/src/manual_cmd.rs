use std::fmt::Write as _;

use manualcode::{complexity_score, validate_manual, ComplexityReport, RunConfig};

use crate::args::ScoreFormat;
use crate::exit::CliResult;
use crate::settings;

pub fn validate(config: &RunConfig) -> CliResult<()> {
    let manual = settings::load(config)?;
    let warnings = validate_manual(&manual);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "ok: {} circumstances, {} warnings ({})",
        manual.len(),
        warnings.len(),
        manual.source_label
    );
    Ok(())
}

fn hits_summary(report: &ComplexityReport) -> String {
    report
        .hits
        .iter()
        .map(|h| format!("#{} {} {:+}", h.example_index, h.rule, h.delta))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn score(config: &RunConfig, format: ScoreFormat) -> CliResult<()> {
    let manual = settings::load(config)?;
    let reports: Vec<ComplexityReport> = manual
        .circumstances
        .iter()
        .map(|c| complexity_score(c, config.threshold))
        .collect();
    let mut out = String::new();
    match format {
        ScoreFormat::Json => {
            out = serde_json::to_string_pretty(&reports)?;
            out.push('\n');
        }
        ScoreFormat::Csv => {
            out.push_str("circumstance_id,score,strategy,threshold\n");
            for r in &reports {
                writeln!(out, "{},{},{},{}", r.circumstance_id, r.total_score, r.strategy, r.threshold).unwrap();
            }
        }
        ScoreFormat::Table => {
            let width = reports.iter().map(|r| r.circumstance_id.len()).max().unwrap_or(0).max(12);
            writeln!(out, "{:<width$}  {:>5}  {:<8}  rules", "circumstance", "score", "strategy").unwrap();
            for r in &reports {
                writeln!(
                    out,
                    "{:<width$}  {:>5}  {:<8}  {}",
                    r.circumstance_id,
                    r.total_score,
                    r.strategy.as_str(),
                    hits_summary(r)
                )
                .unwrap();
            }
            writeln!(out, "threshold: score > {} selects the complex prompt", config.threshold).unwrap();
        }
    }
    print!("{out}");
    Ok(())
}
