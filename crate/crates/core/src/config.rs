//! Run configuration loaded from TOML.
//!
//! ```toml
//! threshold = 2
//! tie_epsilon = 0.02
//! truncation_limit = 3500
//! n_pos = 100
//! n_neg = 100
//! seed = 42
//!
//! [paths]
//! manual = "manual.json"
//! corpus = "corpus.jsonl"
//! output_dir = "run"
//!
//! [provider]
//! provider_name = "openai"
//! model_name = "gpt-4o"
//! temperature = 0.3
//! ```
//!
//! API keys never live here; they are read from the environment variable
//! named by `provider.api_key_env` (default `<PROVIDER>_API_KEY`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::DEFAULT_THRESHOLD;
use crate::corpus::{DEFAULT_SAMPLE_NEGATIVES, DEFAULT_SAMPLE_POSITIVES};
use crate::digest::sha256_hex;
use crate::eval::{UnparseablePolicy, DEFAULT_TIE_EPSILON, Z_95};
use crate::gateway::{ProviderConfig, DEFAULT_MOCK_RESPONSE};
use crate::prompt::DEFAULT_TRUNCATION_LIMIT;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config value: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manual: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub mock_script: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub threshold: i64,
    pub tie_epsilon: f64,
    pub truncation_limit: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub seed: u64,
    pub z: f64,
    pub lenient: bool,
    pub unparseable_policy: UnparseablePolicy,
    pub mock_default_response: String,
    pub paths: Paths,
    pub provider: ProviderConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            tie_epsilon: DEFAULT_TIE_EPSILON,
            truncation_limit: DEFAULT_TRUNCATION_LIMIT,
            n_pos: DEFAULT_SAMPLE_POSITIVES,
            n_neg: DEFAULT_SAMPLE_NEGATIVES,
            seed: 42,
            z: Z_95,
            lenient: false,
            unparseable_policy: UnparseablePolicy::AsNo,
            mock_default_response: DEFAULT_MOCK_RESPONSE.to_string(),
            paths: Paths::default(),
            provider: ProviderConfig::default(),
        }
    }
}

/// The result-affecting subset of a [`RunConfig`].
#[derive(Serialize)]
struct HashedFields<'a> {
    threshold: i64,
    tie_epsilon: f64,
    truncation_limit: usize,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
    z: f64,
    lenient: bool,
    unparseable_policy: UnparseablePolicy,
    provider_name: &'a str,
    model_name: &'a str,
    temperature: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.truncation_limit == 0 {
            return Err(ConfigError::Invalid("truncation_limit must be at least 1".into()));
        }
        if self.n_pos == 0 || self.n_neg == 0 {
            return Err(ConfigError::Invalid("n_pos and n_neg must be positive".into()));
        }
        if !(self.tie_epsilon >= 0.0 && self.tie_epsilon.is_finite()) {
            return Err(ConfigError::Invalid("tie_epsilon must be a nonnegative number".into()));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(ConfigError::Invalid("z must be positive".into()));
        }
        self.provider
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Hash of the settings that change outputs. Paths, concurrency, retry
    /// and timeout settings are excluded so the same experiment hashes the
    /// same from any directory.
    pub fn config_hash(&self) -> String {
        let fields = HashedFields {
            threshold: self.threshold,
            tie_epsilon: self.tie_epsilon,
            truncation_limit: self.truncation_limit,
            n_pos: self.n_pos,
            n_neg: self.n_neg,
            seed: self.seed,
            z: self.z,
            lenient: self.lenient,
            unparseable_policy: self.unparseable_policy,
            provider_name: &self.provider.provider_name,
            model_name: &self.provider.model_name,
            temperature: self.provider.temperature,
        };
        let json = serde_json::to_string(&fields).expect("config serializes");
        sha256_hex(json.as_bytes())[..16].to_string()
    }
}
