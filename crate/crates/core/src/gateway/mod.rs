//! Prompt dispatch to chat-completion providers.
//!
//! [`classify`] sends one prompt with retries and parses the reply;
//! [`run_batch`] fans a prompt list out over a bounded worker pool with a
//! resumable checkpoint.

mod batch;
mod provider;
mod records;
mod verdict;

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::RenderedPrompt;

pub use batch::{checkpoint_key, run_batch, BatchRecord, BatchReport, FailureKind, ItemOutcome};
pub use provider::{
    default_base_url, ChatProvider, ChatRequest, HttpProvider, MockProvider, MockScriptError, ProviderError,
    ScriptEntry, ScriptMatch, ScriptedError, DEFAULT_MOCK_RESPONSE,
};
pub use records::{read_verdict_records, write_verdict_records, FailureRecord, VerdictRecord};
pub use verdict::{parse_verdict, Decision, Verdict};

pub const DEFAULT_TEMPERATURE: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub provider_name: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_concurrency: usize,
    pub max_retries: u32,
    pub request_timeout_secs: f64,
    /// First retry delay; doubles per attempt up to `backoff_max_ms`.
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    /// Environment variable holding the API key. Defaults to `<PROVIDER>_API_KEY`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            provider_name: "mock".into(),
            model_name: "mock".into(),
            temperature: DEFAULT_TEMPERATURE,
            max_concurrency: 4,
            max_retries: 3,
            request_timeout_secs: 120.0,
            backoff_base_ms: 500,
            backoff_max_ms: 30_000,
            base_url: None,
            api_key_env: None,
        }
    }
}

fn env_prefix(provider_name: &str) -> String {
    provider_name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
        .collect()
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let fail = |m: &str| Err(GatewayError::InvalidConfig(m.to_string()));
        if !(0.0..=2.0).contains(&self.temperature) {
            return fail("temperature must be within [0, 2]");
        }
        if self.max_concurrency < 1 {
            return fail("max_concurrency must be at least 1");
        }
        if !(self.request_timeout_secs.is_finite() && self.request_timeout_secs > 0.0) {
            return fail("request_timeout_secs must be positive");
        }
        if self.provider_name.is_empty() || self.model_name.is_empty() {
            return fail("provider_name and model_name must be nonempty");
        }
        Ok(())
    }

    pub fn is_mock(&self) -> bool {
        self.provider_name == "mock"
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.request_timeout_secs)
    }

    pub fn api_key_var(&self) -> String {
        self.api_key_env
            .clone()
            .unwrap_or_else(|| format!("{}_API_KEY", env_prefix(&self.provider_name)))
    }

    pub fn base_url_var(&self) -> String {
        format!("{}_BASE_URL", env_prefix(&self.provider_name))
    }

    /// Explicit `base_url`, then `<PROVIDER>_BASE_URL`, then the provider default.
    pub fn resolve_base_url(&self) -> Option<String> {
        self.base_url
            .clone()
            .or_else(|| std::env::var(self.base_url_var()).ok().filter(|s| !s.is_empty()))
            .or_else(|| default_base_url(&self.provider_name).map(str::to_string))
    }

    /// Builds the live HTTP provider, failing before any request when the key
    /// or endpoint is missing.
    pub fn http_provider(&self) -> Result<HttpProvider, GatewayError> {
        let var = self.api_key_var();
        let key = std::env::var(&var)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| GatewayError::Auth(format!("environment variable {var} is not set")))?;
        let base = self.resolve_base_url().ok_or_else(|| {
            GatewayError::InvalidConfig(format!(
                "no base_url for provider {:?}; set base_url or {}",
                self.provider_name,
                self.base_url_var()
            ))
        })?;
        HttpProvider::new(&base, key).map_err(|e| GatewayError::InvalidConfig(e.to_string()))
    }

    fn backoff(&self, retry: u32) -> Duration {
        let exp = self.backoff_base_ms.saturating_mul(1u64 << retry.min(20));
        let capped = exp.min(self.backoff_max_ms);
        let jitter = if capped > 1 { rand::thread_rng().gen_range(0..=capped / 2) } else { 0 };
        Duration::from_millis(capped + jitter)
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid provider configuration: {0}")]
    InvalidConfig(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("request rejected: {0}")]
    Rejected(ProviderError),
    #[error("gave up after {attempts} attempts: {last}")]
    ExhaustedRetries { attempts: u32, last: ProviderError },
    #[error("checkpoint {path} is corrupt at line {line}: {message}")]
    CheckpointCorrupt { path: String, line: usize, message: String },
    #[error("checkpoint I/O error: {0}")]
    CheckpointIo(#[from] std::io::Error),
    #[error("batch contains duplicate item {circumstance_id}/{narrative_id}")]
    DuplicateItem {
        circumstance_id: String,
        narrative_id: String,
    },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("all {} batch items failed", .failures.len())]
    AllItemsFailed { failures: Vec<BatchRecord> },
}

/// Pause shared by all workers after a rate-limit response.
#[derive(Debug, Default)]
pub(crate) struct RateGate {
    resume_at: Mutex<Option<Instant>>,
}

impl RateGate {
    fn wait(&self) {
        let until = *self.resume_at.lock().expect("rate gate poisoned");
        if let Some(until) = until {
            let now = Instant::now();
            if until > now {
                thread::sleep(until - now);
            }
        }
    }

    fn pause_for(&self, delay: Duration) {
        let mut guard = self.resume_at.lock().expect("rate gate poisoned");
        let candidate = Instant::now() + delay;
        if guard.is_none_or(|current| candidate > current) {
            *guard = Some(candidate);
        }
    }
}

/// Sends one prompt, retrying transient failures up to `max_retries` times.
pub fn classify(
    provider: &dyn ChatProvider,
    prompt: &RenderedPrompt,
    config: &ProviderConfig,
) -> Result<Verdict, GatewayError> {
    classify_gated(provider, prompt, config, &RateGate::default())
}

pub(crate) fn classify_gated(
    provider: &dyn ChatProvider,
    prompt: &RenderedPrompt,
    config: &ProviderConfig,
    gate: &RateGate,
) -> Result<Verdict, GatewayError> {
    let request = ChatRequest {
        model: &config.model_name,
        temperature: config.temperature,
        prompt: &prompt.text,
        timeout: config.request_timeout(),
        circumstance_id: &prompt.circumstance_id,
        narrative_id: &prompt.narrative_id,
    };
    let mut attempts = 0;
    loop {
        gate.wait();
        attempts += 1;
        match provider.complete(&request) {
            Ok(raw) => {
                let mut verdict = parse_verdict(&raw);
                verdict.attempts = attempts;
                return Ok(verdict);
            }
            Err(ProviderError::Auth(m)) => return Err(GatewayError::Auth(m)),
            Err(e) if !e.is_retryable() => return Err(GatewayError::Rejected(e)),
            Err(e) if attempts > config.max_retries => {
                return Err(GatewayError::ExhaustedRetries { attempts, last: e })
            }
            Err(e) => {
                let mut delay = config.backoff(attempts - 1);
                if let ProviderError::RateLimited { retry_after } = e {
                    delay = delay.max(retry_after.unwrap_or_default());
                    gate.pause_for(delay);
                }
                thread::sleep(delay);
            }
        }
    }
}
