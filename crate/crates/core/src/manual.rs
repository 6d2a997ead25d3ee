//! Structured coding-manual content: loading, validation and serialization.
//!
//! A manual is a JSON document holding one entry per circumstance. It is the
//! only input to complexity scoring and the source of every field rendered
//! into a complex prompt.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

const TOP_LEVEL_KEYS: &[&str] = &["source_label", "circumstances"];
const ENTRY_KEYS: &[&str] = &[
    "id",
    "name",
    "definition",
    "guidance",
    "examples_yes",
    "examples_no",
    "training_positive_count",
];

#[derive(Debug, Error)]
pub enum ManualError {
    #[error("manual file not found: {}", .0.display())]
    FileMissing(PathBuf),
    #[error("failed to read manual {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manual JSON at line {line}, column {column}: {message}")]
    MalformedSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate circumstance id {0:?}")]
    DuplicateId(String),
    #[error("missing required field {field:?} in {entry}")]
    MissingRequiredField { field: String, entry: String },
    #[error("invalid field {field:?} in {entry}: {reason}")]
    InvalidField {
        field: String,
        entry: String,
        reason: String,
    },
    #[error("unknown key {key:?} in {entry} (strict mode)")]
    UnknownKey { key: String, entry: String },
}

/// One coding-manual entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circumstance {
    pub id: String,
    pub name: String,
    pub definition: String,
    pub guidance: String,
    pub examples_yes: Vec<String>,
    pub examples_no: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_positive_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manual {
    pub source_label: String,
    pub circumstances: Vec<Circumstance>,
}

impl Manual {
    pub fn get(&self, id: &str) -> Option<&Circumstance> {
        self.circumstances.iter().find(|c| c.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.circumstances.iter().map(|c| c.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.circumstances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circumstances.is_empty()
    }

    /// Pretty-printed JSON in the manual file format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manual serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

pub fn load_manual(path: &Path, strictness: Strictness) -> Result<Manual, ManualError> {
    let bytes = std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ManualError::FileMissing(path.to_path_buf())
        } else {
            ManualError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    parse_manual(&bytes, strictness)
}

pub fn parse_manual(bytes: &[u8], strictness: Strictness) -> Result<Manual, ManualError> {
    let root: Value = serde_json::from_slice(bytes).map_err(|e| ManualError::MalformedSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = root.as_object().ok_or_else(|| ManualError::InvalidField {
        field: "<root>".into(),
        entry: "manual".into(),
        reason: "expected a JSON object".into(),
    })?;
    if strictness == Strictness::Strict {
        reject_unknown(root, TOP_LEVEL_KEYS, "manual")?;
    }

    let source_label = required_string(root, "source_label", "manual")?;
    let entries = root
        .get("circumstances")
        .ok_or_else(|| ManualError::MissingRequiredField {
            field: "circumstances".into(),
            entry: "manual".into(),
        })?
        .as_array()
        .ok_or_else(|| ManualError::InvalidField {
            field: "circumstances".into(),
            entry: "manual".into(),
            reason: "expected an array".into(),
        })?;

    let mut seen = HashSet::new();
    let mut circumstances = Vec::with_capacity(entries.len());
    for (index, entry) in entries.iter().enumerate() {
        let circumstance = parse_entry(index, entry, strictness)?;
        if !seen.insert(circumstance.id.clone()) {
            return Err(ManualError::DuplicateId(circumstance.id));
        }
        circumstances.push(circumstance);
    }

    Ok(Manual {
        source_label,
        circumstances,
    })
}

fn parse_entry(index: usize, entry: &Value, strictness: Strictness) -> Result<Circumstance, ManualError> {
    let mut label = format!("circumstances[{index}]");
    let obj = entry.as_object().ok_or_else(|| ManualError::InvalidField {
        field: "<entry>".into(),
        entry: label.clone(),
        reason: "expected a JSON object".into(),
    })?;

    let id = required_string(obj, "id", &label)?;
    if !is_valid_id(&id) {
        return Err(ManualError::InvalidField {
            field: "id".into(),
            entry: label,
            reason: format!("{id:?} is not a lowercase slug of alphanumerics and hyphens"),
        });
    }
    label = format!("{label} (id {id:?})");
    if strictness == Strictness::Strict {
        reject_unknown(obj, ENTRY_KEYS, &label)?;
    }

    let name = required_string(obj, "name", &label)?;
    if name.trim().is_empty() {
        return Err(ManualError::InvalidField {
            field: "name".into(),
            entry: label,
            reason: "must be nonempty".into(),
        });
    }

    let training_positive_count = match obj.get("training_positive_count") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| ManualError::InvalidField {
            field: "training_positive_count".into(),
            entry: label.clone(),
            reason: format!("expected a nonnegative integer, found {v}"),
        })?),
    };

    Ok(Circumstance {
        definition: required_string(obj, "definition", &label)?,
        guidance: required_string(obj, "guidance", &label)?,
        examples_yes: required_string_list(obj, "examples_yes", &label)?,
        examples_no: required_string_list(obj, "examples_no", &label)?,
        id,
        name,
        training_positive_count,
    })
}

fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], entry: &str) -> Result<(), ManualError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(key) => Err(ManualError::UnknownKey {
            key: key.clone(),
            entry: entry.to_string(),
        }),
        None => Ok(()),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, field: &str, entry: &str) -> Result<&'a Value, ManualError> {
    obj.get(field).ok_or_else(|| ManualError::MissingRequiredField {
        field: field.to_string(),
        entry: entry.to_string(),
    })
}

fn required_string(obj: &Map<String, Value>, field: &str, entry: &str) -> Result<String, ManualError> {
    required(obj, field, entry)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| ManualError::InvalidField {
            field: field.to_string(),
            entry: entry.to_string(),
            reason: "expected a string".into(),
        })
}

fn required_string_list(obj: &Map<String, Value>, field: &str, entry: &str) -> Result<Vec<String>, ManualError> {
    let invalid = || ManualError::InvalidField {
        field: field.to_string(),
        entry: entry.to_string(),
        reason: "expected an array of strings".into(),
    };
    required(obj, field, entry)?
        .as_array()
        .ok_or_else(invalid)?
        .iter()
        .map(|v| v.as_str().map(str::to_string).ok_or_else(invalid))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarningKind {
    EmptyNegativeExamples,
    EmptyGuidance,
    MissingTrainingCount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManualWarning {
    pub circumstance_id: String,
    pub kind: WarningKind,
}

impl fmt::Display for ManualWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let message = match self.kind {
            WarningKind::EmptyNegativeExamples => "no CODE-NO examples; complexity score will be 0",
            WarningKind::EmptyGuidance => "empty coding guidance; complex prompt degrades to near-simple",
            WarningKind::MissingTrainingCount => "no training_positive_count; excluded from bracket analysis",
        };
        write!(f, "{}: {}", self.circumstance_id, message)
    }
}

/// Non-fatal issues that degrade scoring, prompting or bracket analysis.
pub fn validate_manual(manual: &Manual) -> Vec<ManualWarning> {
    let mut warnings = Vec::new();
    for c in &manual.circumstances {
        let mut push = |kind| {
            warnings.push(ManualWarning {
                circumstance_id: c.id.clone(),
                kind,
            })
        };
        if c.examples_no.is_empty() {
            push(WarningKind::EmptyNegativeExamples);
        }
        if c.guidance.trim().is_empty() {
            push(WarningKind::EmptyGuidance);
        }
        if c.training_positive_count.is_none() {
            push(WarningKind::MissingTrainingCount);
        }
    }
    warnings
}
