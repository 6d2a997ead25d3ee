use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};

use super::{classify_gated, ChatProvider, GatewayError, ProviderConfig, RateGate, Verdict};
use crate::complexity::PromptStrategy;
use crate::digest::sha256_hex;
use crate::prompt::RenderedPrompt;

/// Content key for checkpoint reuse. Editing the prompt, model or
/// temperature produces a new key.
pub fn checkpoint_key(prompt_text: &str, model_name: &str, temperature: f64) -> String {
    let material = format!("{prompt_text}\0{model_name}\0{temperature}");
    sha256_hex(material.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Auth,
    ExhaustedRetries,
    Rejected,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ItemOutcome {
    Completed { verdict: Verdict, from_checkpoint: bool },
    Failed { kind: FailureKind, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRecord {
    pub circumstance_id: String,
    pub narrative_id: String,
    pub strategy: PromptStrategy,
    pub prompt_sha256: String,
    pub outcome: ItemOutcome,
}

impl BatchRecord {
    pub fn verdict(&self) -> Option<&Verdict> {
        match &self.outcome {
            ItemOutcome::Completed { verdict, .. } => Some(verdict),
            ItemOutcome::Failed { .. } => None,
        }
    }
}

/// Batch results sorted by `(circumstance_id, narrative_id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub records: Vec<BatchRecord>,
}

impl BatchReport {
    pub fn completed(&self) -> impl Iterator<Item = (&BatchRecord, &Verdict)> {
        self.records.iter().filter_map(|r| r.verdict().map(|v| (r, v)))
    }

    pub fn failures(&self) -> impl Iterator<Item = &BatchRecord> {
        self.records.iter().filter(|r| r.verdict().is_none())
    }

    pub fn is_partial(&self) -> bool {
        self.failures().next().is_some()
    }

    pub fn from_checkpoint_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.outcome, ItemOutcome::Completed { from_checkpoint: true, .. }))
            .count()
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointLine {
    key: String,
    circumstance_id: String,
    narrative_id: String,
    verdict: Verdict,
}

fn load_checkpoint(path: &Path) -> Result<HashMap<String, Verdict>, GatewayError> {
    let mut done = HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(file);
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let complete = buf.ends_with('\n');
        if buf.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CheckpointLine>(buf.trim_end()) {
            Ok(entry) => {
                done.insert(entry.key, entry.verdict);
            }
            // A final line without a newline is an interrupted write.
            Err(_) if !complete => break,
            Err(e) => {
                return Err(GatewayError::CheckpointCorrupt {
                    path: path.display().to_string(),
                    line: line_no,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(done)
}

struct CheckpointWriter {
    file: Mutex<File>,
    error: Mutex<Option<std::io::Error>>,
}

impl CheckpointWriter {
    fn open(path: &Path) -> Result<Self, GatewayError> {
        let mut file = OpenOptions::new().create(true).append(true).read(true).open(path)?;
        // Terminate a torn final line so the next append starts cleanly.
        let len = file.metadata()?.len();
        if len > 0 {
            let content = std::fs::read(path)?;
            if content.last() != Some(&b'\n') {
                file.write_all(b"\n")?;
            }
        }
        Ok(Self {
            file: Mutex::new(file),
            error: Mutex::new(None),
        })
    }

    fn append(&self, line: &CheckpointLine) {
        let mut text = serde_json::to_string(line).expect("checkpoint line serializes");
        text.push('\n');
        let result = {
            let mut file = self.file.lock().expect("checkpoint writer poisoned");
            file.write_all(text.as_bytes()).and_then(|_| file.flush())
        };
        if let Err(e) = result {
            self.error.lock().expect("checkpoint error poisoned").get_or_insert(e);
        }
    }
}

/// Classifies every prompt with at most `max_concurrency` requests in flight.
///
/// Per-item failures are recorded, not raised; the call only fails when
/// every item fails or the checkpoint is unusable. With a checkpoint path,
/// completed items are appended as they finish and reused on the next run.
pub fn run_batch(
    provider: &dyn ChatProvider,
    prompts: &[RenderedPrompt],
    config: &ProviderConfig,
    checkpoint: Option<&Path>,
) -> Result<BatchReport, GatewayError> {
    config.validate()?;
    if prompts.is_empty() {
        return Err(GatewayError::EmptyBatch);
    }
    let mut seen = HashSet::new();
    for p in prompts {
        if !seen.insert((p.circumstance_id.as_str(), p.narrative_id.as_str())) {
            return Err(GatewayError::DuplicateItem {
                circumstance_id: p.circumstance_id.clone(),
                narrative_id: p.narrative_id.clone(),
            });
        }
    }

    let done = match checkpoint {
        Some(path) => load_checkpoint(path)?,
        None => HashMap::new(),
    };
    let writer = checkpoint.map(CheckpointWriter::open).transpose()?;

    let keys: Vec<String> = prompts
        .iter()
        .map(|p| checkpoint_key(&p.text, &config.model_name, config.temperature))
        .collect();
    let mut outcomes: Vec<Option<ItemOutcome>> = keys
        .iter()
        .map(|k| {
            done.get(k).map(|v| ItemOutcome::Completed {
                verdict: v.clone(),
                from_checkpoint: true,
            })
        })
        .collect();
    let pending: Vec<usize> = (0..prompts.len()).filter(|&i| outcomes[i].is_none()).collect();

    let gate = RateGate::default();
    let next = AtomicUsize::new(0);
    let workers = config.max_concurrency.min(pending.len());
    let (tx, rx) = mpsc::channel();
    thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (pending, next, gate, writer, keys) = (&pending, &next, &gate, &writer, &keys);
            scope.spawn(move || loop {
                let slot = next.fetch_add(1, Ordering::SeqCst);
                let Some(&index) = pending.get(slot) else { break };
                let prompt = &prompts[index];
                let outcome = match classify_gated(provider, prompt, config, gate) {
                    Ok(verdict) => {
                        if let Some(w) = writer {
                            w.append(&CheckpointLine {
                                key: keys[index].clone(),
                                circumstance_id: prompt.circumstance_id.clone(),
                                narrative_id: prompt.narrative_id.clone(),
                                verdict: verdict.clone(),
                            });
                        }
                        ItemOutcome::Completed {
                            verdict,
                            from_checkpoint: false,
                        }
                    }
                    Err(e) => {
                        let kind = match e {
                            GatewayError::Auth(_) => FailureKind::Auth,
                            GatewayError::ExhaustedRetries { .. } => FailureKind::ExhaustedRetries,
                            _ => FailureKind::Rejected,
                        };
                        ItemOutcome::Failed {
                            kind,
                            message: e.to_string(),
                        }
                    }
                };
                if tx.send((index, outcome)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (index, outcome) in rx {
            outcomes[index] = Some(outcome);
        }
    });

    if let Some(w) = writer {
        if let Some(e) = w.error.into_inner().expect("checkpoint error poisoned") {
            return Err(GatewayError::CheckpointIo(e));
        }
    }

    let mut records: Vec<BatchRecord> = prompts
        .iter()
        .zip(outcomes)
        .map(|(p, outcome)| BatchRecord {
            circumstance_id: p.circumstance_id.clone(),
            narrative_id: p.narrative_id.clone(),
            strategy: p.strategy,
            prompt_sha256: sha256_hex(p.text.as_bytes()),
            outcome: outcome.expect("every pending item reports an outcome"),
        })
        .collect();
    records.sort_by(|a, b| {
        (&a.circumstance_id, &a.narrative_id).cmp(&(&b.circumstance_id, &b.narrative_id))
    });

    if records.iter().all(|r| r.verdict().is_none()) {
        return Err(GatewayError::AllItemsFailed { failures: records });
    }
    Ok(BatchReport { records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_depends_on_model_and_temperature() {
        let a = checkpoint_key("p", "m", 0.3);
        assert_eq!(a, checkpoint_key("p", "m", 0.3));
        assert_ne!(a, checkpoint_key("p", "m2", 0.3));
        assert_ne!(a, checkpoint_key("p", "m", 0.0));
        assert_ne!(a, checkpoint_key("p2", "m", 0.3));
    }

    #[test]
    fn torn_last_line_is_ignored_but_inner_corruption_is_not() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.jsonl");
        let good = serde_json::to_string(&CheckpointLine {
            key: "k".into(),
            circumstance_id: "c".into(),
            narrative_id: "n".into(),
            verdict: super::super::parse_verdict("FINAL CODING: No"),
        })
        .unwrap();
        std::fs::write(&path, format!("{good}\n{{\"key\": \"tru")).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap().len(), 1);

        std::fs::write(&path, format!("garbage\n{good}\n")).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(GatewayError::CheckpointCorrupt { line: 1, .. })
        ));
    }
}
