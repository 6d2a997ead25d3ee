use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BatchRecord, Decision, FailureKind, ItemOutcome};
use crate::complexity::PromptStrategy;
use crate::digest::sha256_hex;
use crate::jsonl::{self, JsonlError};

/// One line of a verdict file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub circumstance_id: String,
    pub narrative_id: String,
    pub strategy: PromptStrategy,
    pub decision: Decision,
    pub evidence: Option<String>,
    pub attempts: u32,
    pub raw_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub circumstance_id: String,
    pub narrative_id: String,
    pub strategy: PromptStrategy,
    pub kind: FailureKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl VerdictRecord {
    pub fn from_batch(record: &BatchRecord, config_hash: Option<&str>) -> Option<Self> {
        let verdict = record.verdict()?;
        Some(Self {
            circumstance_id: record.circumstance_id.clone(),
            narrative_id: record.narrative_id.clone(),
            strategy: record.strategy,
            decision: verdict.decision,
            evidence: verdict.evidence.clone(),
            attempts: verdict.attempts,
            raw_sha256: sha256_hex(verdict.raw_response.as_bytes()),
            config_hash: config_hash.map(str::to_string),
        })
    }
}

impl FailureRecord {
    pub fn from_batch(record: &BatchRecord, config_hash: Option<&str>) -> Option<Self> {
        match &record.outcome {
            ItemOutcome::Failed { kind, message } => Some(Self {
                circumstance_id: record.circumstance_id.clone(),
                narrative_id: record.narrative_id.clone(),
                strategy: record.strategy,
                kind: *kind,
                message: message.clone(),
                config_hash: config_hash.map(str::to_string),
            }),
            ItemOutcome::Completed { .. } => None,
        }
    }
}

pub fn write_verdict_records(path: &Path, records: &[VerdictRecord]) -> std::io::Result<()> {
    jsonl::write_jsonl(path, records)
}

pub fn read_verdict_records(path: &Path) -> Result<Vec<VerdictRecord>, JsonlError> {
    jsonl::read_jsonl(path)
}
