//! Offline analyses: strategy prediction, brackets and the full report.

use std::path::Path;

use manualcode::eval::report::{bracket_markdown, fixture_report, strategy_markdown, MetricsDocument};
use manualcode::eval::{bracket_analysis, strategy_analysis, AnalysisFixture, StrategyInput};
use manualcode::{complexity_score, RunConfig};
use serde::Serialize;

use crate::args::{BracketArgs, ReportArgs, ReportFormat, StrategyArgs};
use crate::exit::{CliResult, Failure};
use crate::settings;

fn emit(format: ReportFormat, value: &impl Serialize, markdown: String) -> CliResult<()> {
    match format {
        ReportFormat::Markdown => print!("{markdown}"),
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn read_metrics(path: &Path) -> CliResult<MetricsDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::from(e).context(format!("{}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::from(e).context(format!("{}", path.display())))
}

/// Rows for circumstances with a defined F1 under both strategies, in
/// manual order.
fn inputs_from_runs(config: &RunConfig, simple: &Path, complex: &Path) -> CliResult<Vec<StrategyInput>> {
    let manual = settings::load(config)?;
    let simple = read_metrics(simple)?;
    let complex = read_metrics(complex)?;
    let f1 = |doc: &MetricsDocument, id: &str| {
        doc.circumstances
            .iter()
            .find(|c| c.circumstance_id == id)
            .and_then(|c| c.metrics.f1.map(|m| m.point))
    };
    let mut rows = Vec::new();
    for c in &manual.circumstances {
        match (f1(&simple, &c.id), f1(&complex, &c.id)) {
            (Some(s), Some(x)) => rows.push(StrategyInput {
                circumstance_id: c.id.clone(),
                score: complexity_score(c, config.threshold).total_score,
                f1_simple: s,
                f1_complex: x,
            }),
            (None, None) => {}
            _ => eprintln!("warning: {} lacks a defined F1 in one of the runs; skipped", c.id),
        }
    }
    if rows.is_empty() {
        return Err(Failure::data("the two runs share no circumstance with a defined F1"));
    }
    Ok(rows)
}

pub fn strategy(config: &RunConfig, args: &StrategyArgs) -> CliResult<()> {
    let rows = match (&args.simple_metrics, &args.complex_metrics) {
        (Some(s), Some(c)) => inputs_from_runs(config, s, c)?,
        _ => {
            if config.paths.fixture.is_none() {
                return Err(Failure::usage(
                    "give --fixture, or --simple-metrics and --complex-metrics with --manual",
                ));
            }
            AnalysisFixture::load(&settings::fixture_path(config)?)?.strategy_inputs()
        }
    };
    let analysis = strategy_analysis(&rows, config.tie_epsilon, config.threshold);
    emit(args.format, &analysis, strategy_markdown(&analysis))
}

pub fn brackets(config: &RunConfig, args: &BracketArgs) -> CliResult<()> {
    let fixture = AnalysisFixture::load(&settings::fixture_path(config)?)?;
    let analysis = bracket_analysis(&fixture.bracket_inputs(config.threshold));
    for id in &analysis.skipped {
        eprintln!("warning: {id} has no training count; excluded");
    }
    emit(args.format, &analysis, bracket_markdown(&analysis))
}

pub fn report(config: &RunConfig, args: &ReportArgs) -> CliResult<()> {
    let fixture = AnalysisFixture::load(&settings::fixture_path(config)?)?;
    let text = fixture_report(&fixture, config.threshold, config.tie_epsilon);
    match &args.output {
        Some(path) => settings::write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
