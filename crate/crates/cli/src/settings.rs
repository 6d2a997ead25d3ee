//! Config file plus command-line overrides, and the output layout.

use std::fs;
use std::path::{Path, PathBuf};

use manualcode::corpus::EvaluationSample;
use manualcode::{load_manual, Manual, RunConfig, Strictness};

use crate::args::Overrides;
use crate::exit::{CliResult, Failure};

pub const DEFAULT_OUTPUT_DIR: &str = "manualcode-out";

pub fn resolve(o: &Overrides) -> CliResult<RunConfig> {
    let mut c = match &o.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = &o.$flag { c.$($field).+ = v.clone().into(); })*
        };
    }
    set!(
        manual => paths.manual,
        corpus => paths.corpus,
        output_dir => paths.output_dir,
        mock_script => paths.mock_script,
        fixture => paths.fixture,
        threshold => threshold,
        tie_epsilon => tie_epsilon,
        truncation_limit => truncation_limit,
        n_pos => n_pos,
        n_neg => n_neg,
        seed => seed,
        z => z,
        unparseable_policy => unparseable_policy,
        provider => provider.provider_name,
        model => provider.model_name,
        temperature => provider.temperature,
        max_concurrency => provider.max_concurrency,
        max_retries => provider.max_retries,
        request_timeout_secs => provider.request_timeout_secs,
    );
    if let Some(url) = &o.base_url {
        c.provider.base_url = Some(url.clone());
    }
    if let Some(var) = &o.api_key_env {
        c.provider.api_key_env = Some(var.clone());
    }
    if o.lenient {
        c.lenient = true;
    }
    c.validate()?;
    Ok(c)
}

fn existing(path: Option<&PathBuf>, what: &str, flag: &str) -> CliResult<PathBuf> {
    let path = path.ok_or_else(|| Failure::usage(format!("no {what} given (use {flag} or the config file)")))?;
    if !path.exists() {
        return Err(Failure::usage(format!("{what} {} does not exist", path.display())));
    }
    Ok(path.clone())
}

pub fn manual_path(c: &RunConfig) -> CliResult<PathBuf> {
    existing(c.paths.manual.as_ref(), "manual", "--manual")
}

pub fn corpus_path(c: &RunConfig) -> CliResult<PathBuf> {
    existing(c.paths.corpus.as_ref(), "corpus", "--corpus")
}

pub fn fixture_path(c: &RunConfig) -> CliResult<PathBuf> {
    existing(c.paths.fixture.as_ref(), "results fixture", "--fixture")
}

pub fn load(c: &RunConfig) -> CliResult<Manual> {
    let strictness = if c.lenient { Strictness::Lenient } else { Strictness::Strict };
    Ok(load_manual(&manual_path(c)?, strictness)?)
}

pub fn output_dir(c: &RunConfig) -> PathBuf {
    c.paths
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

pub fn samples_dir(c: &RunConfig) -> PathBuf {
    output_dir(c).join("samples")
}

pub fn ensure_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| Failure::new(crate::exit::ExitCode::Usage, e).context(format!("cannot create {}", path.display())))
}

/// Sample files in id order, optionally restricted to `only`.
pub fn load_samples(c: &RunConfig, only: &[String]) -> CliResult<Vec<EvaluationSample>> {
    let dir = samples_dir(c);
    if !dir.is_dir() {
        return Err(Failure::data(format!(
            "no samples under {} (run `manualcode sample` first)",
            dir.display()
        )));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "jsonl"));
    paths.sort();
    let mut samples = Vec::new();
    for path in paths {
        let sample = EvaluationSample::read(&path)?;
        if only.is_empty() || only.iter().any(|id| id == sample.circumstance_id()) {
            samples.push(sample);
        }
    }
    for id in only {
        if !samples.iter().any(|s| s.circumstance_id() == id) {
            return Err(Failure::data(format!("no sample for circumstance {id:?} in {}", dir.display())));
        }
    }
    if samples.is_empty() {
        return Err(Failure::data(format!("no sample files in {}", dir.display())));
    }
    Ok(samples)
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::from(e).context(format!("cannot write {}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::from(e).context(format!("cannot write {}", path.display())))
}
