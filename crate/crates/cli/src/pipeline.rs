//! `sample`, `build-prompts` and `classify`.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use manualcode::corpus::{load_corpus, sample_corpus, CorpusError, EvaluationSample, MalformedPolicy, SampleRequest};
use manualcode::digest::sha256_hex;
use manualcode::gateway::{
    run_batch, write_verdict_records, BatchRecord, ChatProvider, FailureRecord, GatewayError, MockProvider,
    VerdictRecord,
};
use manualcode::jsonl::write_jsonl;
use manualcode::{complexity_score, PromptBuilder, PromptStrategy, RenderedPrompt, RunConfig};
use serde::Serialize;
use serde_json::json;

use crate::args::{ClassifyArgs, PromptArgs, SampleArgs, StrategyMode};
use crate::exit::{CliResult, ExitCode, Failure};
use crate::settings;

fn check_id(id: &str) -> CliResult<()> {
    let ok = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Failure::usage(format!("invalid circumstance id {id:?}")))
    }
}

pub fn sample(config: &RunConfig, args: &SampleArgs) -> CliResult<()> {
    let corpus = settings::corpus_path(config)?;
    let explicit = !args.circumstances.is_empty();
    let ids: Vec<String> = if explicit {
        args.circumstances.clone()
    } else {
        settings::load(config)?.ids().map(str::to_string).collect()
    };
    for id in &ids {
        check_id(id)?;
    }
    let policy = if args.skip_malformed { MalformedPolicy::Skip } else { MalformedPolicy::Abort };
    let request = SampleRequest {
        n_pos: config.n_pos,
        n_neg: config.n_neg,
        seed: config.seed,
    };
    let (results, pass) = sample_corpus(load_corpus(&corpus, policy)?, &ids, request)?;
    if pass.skipped > 0 {
        eprintln!("warning: skipped {} malformed corpus lines", pass.skipped);
    }

    let dir = settings::samples_dir(config);
    settings::ensure_dir(&dir)?;
    let hash = config.config_hash();
    let mut written = 0;
    for (id, result) in results {
        match result {
            Ok(mut s) => {
                s.header.config_hash = Some(hash.clone());
                let path = dir.join(format!("{id}.jsonl"));
                s.write(&path)?;
                written += 1;
                let flag = if s.under_sampled() { "  (under-sampled)" } else { "" };
                println!("{id}: {} positive, {} negative{flag}", s.positive_count(), s.negative_count());
            }
            Err(e @ (CorpusError::UnknownCircumstance(_) | CorpusError::ZeroPositives(_))) if !explicit => {
                eprintln!("warning: {e}; skipped");
            }
            Err(e) => return Err(e.into()),
        }
    }
    if written == 0 {
        return Err(Failure::data("no circumstance could be sampled from the corpus"));
    }
    println!("{} records read, samples written to {}", pass.records, dir.display());
    Ok(())
}

struct Plan {
    circumstance_id: String,
    strategy: PromptStrategy,
    score: i64,
}

fn plan_prompts(
    config: &RunConfig,
    mode: StrategyMode,
    only: &[String],
) -> CliResult<(Vec<Plan>, Vec<RenderedPrompt>)> {
    let manual = settings::load(config)?;
    let samples: Vec<EvaluationSample> = settings::load_samples(config, only)?;

    let wanted: HashSet<&str> = samples
        .iter()
        .flat_map(|s| s.entries.iter().map(|e| e.narrative_id.as_str()))
        .collect();
    let mut reader = load_corpus(&settings::corpus_path(config)?, MalformedPolicy::Skip)?;
    let mut texts: HashMap<String, String> = HashMap::with_capacity(wanted.len());
    for record in reader.by_ref() {
        let record = record?;
        if wanted.contains(record.narrative_id.as_str()) {
            texts.insert(record.narrative_id, record.text);
        }
    }
    let corpus_sha = reader.sha256();

    let builder = PromptBuilder::new(config.truncation_limit);
    let mut plans = Vec::new();
    let mut prompts = Vec::new();
    for s in &samples {
        let id = s.circumstance_id();
        if s.header.corpus_sha256 != corpus_sha {
            eprintln!("warning: sample {id} was drawn from a different corpus file");
        }
        let circumstance = manual
            .get(id)
            .ok_or_else(|| Failure::data(format!("sample circumstance {id:?} is not in the manual")))?;
        let report = complexity_score(circumstance, config.threshold);
        let strategy = match mode {
            StrategyMode::Auto => report.strategy,
            StrategyMode::Simple => PromptStrategy::Simple,
            StrategyMode::Complex => PromptStrategy::Complex,
        };
        for entry in &s.entries {
            let text = texts.get(&entry.narrative_id).ok_or_else(|| {
                Failure::data(format!("narrative {:?} from sample {id} is not in the corpus", entry.narrative_id))
            })?;
            let prompt = builder
                .build(strategy, circumstance, &entry.narrative_id, text)
                .map_err(|e| Failure::data(format!("{id}: {e}")))?;
            prompts.push(prompt);
        }
        plans.push(Plan {
            circumstance_id: id.to_string(),
            strategy,
            score: report.total_score,
        });
    }
    Ok((plans, prompts))
}

#[derive(Serialize)]
struct PromptLine<'a> {
    circumstance_id: &'a str,
    narrative_id: &'a str,
    strategy: PromptStrategy,
    truncated: bool,
    prompt_sha256: String,
    config_hash: &'a str,
    prompt: &'a str,
}

pub fn build_prompts(config: &RunConfig, args: &PromptArgs) -> CliResult<()> {
    let (plans, prompts) = plan_prompts(config, args.strategy, &args.circumstances)?;
    let hash = config.config_hash();
    let lines: Vec<PromptLine> = prompts
        .iter()
        .map(|p| PromptLine {
            circumstance_id: &p.circumstance_id,
            narrative_id: &p.narrative_id,
            strategy: p.strategy,
            truncated: p.truncated,
            prompt_sha256: sha256_hex(p.text.as_bytes()),
            config_hash: &hash,
            prompt: &p.text,
        })
        .collect();
    let path = match &args.output {
        Some(p) => p.clone(),
        None => {
            let dir = settings::output_dir(config);
            settings::ensure_dir(&dir)?;
            dir.join("prompts.jsonl")
        }
    };
    write_jsonl(&path, &lines)?;
    for p in &plans {
        println!("{}: {} (score {})", p.circumstance_id, p.strategy, p.score);
    }
    println!("{} prompts written to {}", lines.len(), path.display());
    Ok(())
}

fn provider(config: &RunConfig) -> CliResult<Box<dyn ChatProvider>> {
    if !config.provider.is_mock() {
        return Ok(Box::new(config.provider.http_provider()?));
    }
    Ok(match &config.paths.mock_script {
        Some(path) => {
            if !path.exists() {
                return Err(Failure::usage(format!("mock script {} does not exist", path.display())));
            }
            Box::new(MockProvider::from_script_file(path, config.mock_default_response.clone())?)
        }
        None => Box::new(MockProvider::new(config.mock_default_response.clone())),
    })
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_') { c } else { '_' })
        .collect()
}

fn archive_raw(dir: &Path, records: &[BatchRecord]) -> CliResult<()> {
    for r in records {
        if let Some(v) = r.verdict() {
            let sub = dir.join(&r.circumstance_id);
            settings::ensure_dir(&sub)?;
            settings::write_text(&sub.join(format!("{}.txt", file_stem(&r.narrative_id))), &v.raw_response)?;
        }
    }
    Ok(())
}

pub fn classify(config: &RunConfig, args: &ClassifyArgs) -> CliResult<()> {
    let (plans, prompts) = plan_prompts(config, args.strategy, &args.circumstances)?;
    // Fails with exit 3 before any request when the key is missing.
    let provider = provider(config)?;
    let started_at = chrono::Utc::now().to_rfc3339();
    let hash = config.config_hash();
    let out = settings::output_dir(config);
    settings::ensure_dir(&out)?;

    let records = match run_batch(&*provider, &prompts, &config.provider, args.checkpoint.as_deref()) {
        Ok(report) => report.records,
        Err(GatewayError::AllItemsFailed { failures }) => {
            let lines: Vec<FailureRecord> =
                failures.iter().filter_map(|r| FailureRecord::from_batch(r, Some(&hash))).collect();
            write_jsonl(&out.join("failures.jsonl"), &lines)?;
            let first = lines.first().map(|f| f.message.clone()).unwrap_or_default();
            return Err(Failure::new(
                ExitCode::Provider,
                anyhow::anyhow!("all {} items failed; first error: {first}", lines.len()),
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let finished_at = chrono::Utc::now().to_rfc3339();

    let verdict_dir = out.join("verdicts");
    settings::ensure_dir(&verdict_dir)?;
    let mut summary = Vec::new();
    for plan in &plans {
        let mine: Vec<&BatchRecord> = records.iter().filter(|r| r.circumstance_id == plan.circumstance_id).collect();
        let verdicts: Vec<VerdictRecord> =
            mine.iter().filter_map(|r| VerdictRecord::from_batch(r, Some(&hash))).collect();
        write_verdict_records(&verdict_dir.join(format!("{}.jsonl", plan.circumstance_id)), &verdicts)?;
        summary.push(json!({
            "circumstance_id": plan.circumstance_id,
            "strategy": plan.strategy,
            "complexity_score": plan.score,
            "prompts": mine.len(),
            "verdicts": verdicts.len(),
            "failures": mine.len() - verdicts.len(),
        }));
    }
    let failures: Vec<FailureRecord> = records.iter().filter_map(|r| FailureRecord::from_batch(r, Some(&hash))).collect();
    write_jsonl(&out.join("failures.jsonl"), &failures)?;
    if args.archive_raw {
        archive_raw(&out.join("raw"), &records)?;
    }

    let from_checkpoint = records
        .iter()
        .filter(|r| matches!(r.outcome, manualcode::gateway::ItemOutcome::Completed { from_checkpoint: true, .. }))
        .count();
    let prompt_hashes: Vec<serde_json::Value> = records
        .iter()
        .map(|r| json!({"circumstance_id": r.circumstance_id, "narrative_id": r.narrative_id, "prompt_sha256": r.prompt_sha256}))
        .collect();
    let manifest = json!({
        "config_hash": hash,
        "seed": config.seed,
        "strategy_mode": format!("{:?}", args.strategy).to_lowercase(),
        "threshold": config.threshold,
        "provider": config.provider.provider_name,
        "model": config.provider.model_name,
        "temperature": config.provider.temperature,
        "started_at": started_at,
        "finished_at": finished_at,
        "from_checkpoint": from_checkpoint,
        "circumstances": summary,
        "prompts": prompt_hashes,
        "config": config,
    });
    settings::write_json(&out.join("manifest.json"), &manifest)?;

    for s in &summary {
        println!(
            "{}: {} prompt, {} verdicts, {} failures",
            s["circumstance_id"].as_str().unwrap_or_default(),
            s["strategy"].as_str().unwrap_or_default(),
            s["verdicts"],
            s["failures"]
        );
    }
    println!("verdicts written to {}", verdict_dir.display());
    if !failures.is_empty() {
        return Err(Failure::new(
            ExitCode::Partial,
            anyhow::anyhow!(
                "{} of {} items failed; see {}",
                failures.len(),
                records.len(),
                out.join("failures.jsonl").display()
            ),
        ));
    }
    Ok(())
}
