use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use manualcode::corpus::EvaluationSample;
use manualcode::eval::report::{
    disagreement_markdown, fixture_report, metrics_markdown, EvaluatedCircumstance, MetricsDocument, F1_INTERVAL_METHOD,
};
use manualcode::eval::{confusion, disagreement_report, metrics, pair_verdicts, AnalysisFixture};
use manualcode::gateway::{read_verdict_records, Decision, VerdictRecord};
use manualcode::RunConfig;

use crate::args::EvaluateArgs;
use crate::exit::{CliResult, Failure};
use crate::settings;

fn verdict_file(dir: &Path, circumstance_id: &str) -> PathBuf {
    dir.join(format!("{circumstance_id}.jsonl"))
}

/// Verdict files present in `dir`, by circumstance id.
fn verdict_ids(dir: &Path) -> CliResult<BTreeSet<String>> {
    if !dir.is_dir() {
        return Err(Failure::data(format!(
            "no verdicts: {} does not exist (run `manualcode classify` first)",
            dir.display()
        )));
    }
    let mut ids = BTreeSet::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "jsonl") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.insert(stem.to_string());
            }
        }
    }
    Ok(ids)
}

fn check_uniform<'a>(what: &str, hashes: impl Iterator<Item = Option<&'a str>>, force: bool) -> CliResult<()> {
    let distinct: BTreeSet<&str> = hashes.flatten().collect();
    if distinct.len() > 1 {
        let list = distinct.into_iter().collect::<Vec<_>>().join(", ");
        if !force {
            return Err(Failure::data(format!(
                "{what} come from different configurations ({list}); pass --force to evaluate anyway"
            )));
        }
        eprintln!("warning: {what} come from different configurations ({list})");
    }
    Ok(())
}

struct Evaluated {
    sample: EvaluationSample,
    records: Vec<VerdictRecord>,
}

fn load_run(config: &RunConfig, args: &EvaluateArgs, dir: &Path) -> CliResult<Vec<Evaluated>> {
    let samples = settings::load_samples(config, &[])?;
    let ids = verdict_ids(dir)?;
    for id in &ids {
        if !samples.iter().any(|s| s.circumstance_id() == id) {
            return Err(Failure::data(format!(
                "verdict file {} has no matching sample",
                verdict_file(dir, id).display()
            )));
        }
    }
    let mut out = Vec::new();
    for sample in samples {
        let id = sample.circumstance_id().to_string();
        if !ids.contains(&id) {
            continue;
        }
        let path = verdict_file(dir, &id);
        let records = read_verdict_records(&path)?;
        if records.is_empty() {
            return Err(Failure::data(format!("no verdicts in {}", path.display())));
        }
        out.push(Evaluated { sample, records });
    }
    if out.is_empty() {
        return Err(Failure::data(format!("no verdicts found in {}", dir.display())));
    }
    check_uniform(
        "samples",
        out.iter().map(|e| e.sample.header.config_hash.as_deref()),
        args.force,
    )?;
    check_uniform(
        "verdicts",
        out.iter().flat_map(|e| e.records.iter().map(|r| r.config_hash.as_deref())),
        args.force,
    )?;
    Ok(out)
}

fn score(config: &RunConfig, run: &[Evaluated]) -> CliResult<MetricsDocument> {
    let mut circumstances = Vec::new();
    for e in run {
        let id = e.sample.circumstance_id();
        let paired = pair_verdicts(&e.sample, &e.records).map_err(|err| Failure::from(err).context(format!("{id}")))?;
        let decisions: HashMap<&str, Decision> = paired.iter().map(|(k, v)| (*k, v.decision)).collect();
        let matrix = confusion(&e.sample, &decisions, config.unparseable_policy)
            .map_err(|err| Failure::from(err).context(format!("{id}")))?;
        let strategies: BTreeSet<_> = e.records.iter().map(|r| r.strategy).collect();
        circumstances.push(EvaluatedCircumstance {
            circumstance_id: id.to_string(),
            strategy: (strategies.len() == 1).then(|| *strategies.iter().next().unwrap()),
            under_sampled: e.sample.under_sampled(),
            sample_positives: e.sample.positive_count(),
            sample_negatives: e.sample.negative_count(),
            metrics: metrics(id, matrix, config.z),
        });
    }
    let defined: Vec<f64> = circumstances.iter().filter_map(|c| c.metrics.f1.map(|m| m.point)).collect();
    let undefined_f1 = circumstances
        .iter()
        .filter(|c| c.metrics.f1.is_none())
        .map(|c| c.circumstance_id.clone())
        .collect();
    Ok(MetricsDocument {
        config_hash: Some(config.config_hash()),
        f1_interval_method: F1_INTERVAL_METHOD.to_string(),
        z: config.z,
        unparseable_policy: config.unparseable_policy,
        circumstances,
        macro_f1: manualcode::eval::mean(&defined),
        undefined_f1,
    })
}

pub fn evaluate(config: &RunConfig, args: &EvaluateArgs) -> CliResult<()> {
    let out = settings::output_dir(config);
    let fixture = match &config.paths.fixture {
        Some(_) => Some(AnalysisFixture::load(&settings::fixture_path(config)?)?),
        None => None,
    };

    let mut report = format!("# Evaluation report\n\nConfig hash: `{}`\n\n", config.config_hash());
    let samples_present = settings::samples_dir(config).is_dir();
    if samples_present || fixture.is_none() {
        let verdict_dir = args.verdicts.clone().unwrap_or_else(|| out.join("verdicts"));
        let run = load_run(config, args, &verdict_dir)?;
        let doc = score(config, &run)?;
        settings::write_json(&out.join("metrics.json"), &doc)?;
        report.push_str(&metrics_markdown(&doc));

        let mut compared: Vec<(String, HashMap<String, Vec<VerdictRecord>>)> = Vec::new();
        for dir in &args.compare {
            let mut by_id = HashMap::new();
            for id in verdict_ids(dir)? {
                by_id.insert(id.clone(), read_verdict_records(&verdict_file(dir, &id))?);
            }
            compared.push((dir.display().to_string(), by_id));
        }
        report.push_str("\n## Disagreements with labels\n\n");
        for e in &run {
            let id = e.sample.circumstance_id();
            let mut runs = vec![("run".to_string(), e.records.clone())];
            for (name, by_id) in &compared {
                if let Some(records) = by_id.get(id) {
                    runs.push((name.clone(), records.clone()));
                }
            }
            let rows = disagreement_report(&e.sample, &runs, config.unparseable_policy)?;
            report.push_str(&disagreement_markdown(id, &rows));
            report.push('\n');
        }

        match doc.macro_f1 {
            Some(m) => println!("macro F1 {m:.3} over {} circumstances", doc.circumstances.len() - doc.undefined_f1.len()),
            None => println!("macro F1 undefined: no circumstance has a defined F1"),
        }
    }
    if let Some(f) = &fixture {
        report.push('\n');
        report.push_str(&fixture_report(f, config.threshold, config.tie_epsilon));
    }
    settings::ensure_dir(&out)?;
    let path = out.join("report.md");
    settings::write_text(&path, &report)?;
    println!("report written to {}", path.display());
    Ok(())
}
