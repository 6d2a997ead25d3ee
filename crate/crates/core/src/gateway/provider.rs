//! Chat-completion providers: the single-turn contract, an offline scripted
//! mock, and an HTTP client for OpenAI-compatible endpoints.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::sha256_hex;

/// One user message, no system prompt, no history.
#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub model: &'a str,
    pub temperature: f64,
    pub prompt: &'a str,
    pub timeout: Duration,
    /// Routing metadata, never sent over the wire.
    pub circumstance_id: &'a str,
    pub narrative_id: &'a str,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited")]
    RateLimited { retry_after: Option<Duration> },
    #[error("request timed out")]
    Timeout,
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("request rejected with status {status}: {message}")]
    Rejected { status: u16, message: String },
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            ProviderError::Transport(_) | ProviderError::RateLimited { .. } | ProviderError::Timeout
        )
    }
}

pub trait ChatProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, ProviderError>;
}

impl<P: ChatProvider + ?Sized> ChatProvider for &P {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for Box<P> {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
}

// ---- mock ------------------------------------------------------------------

pub const DEFAULT_MOCK_RESPONSE: &str = "EVIDENCE: None found\nFINAL CODING: No";

#[derive(Debug, Error)]
pub enum MockScriptError {
    #[error("failed to read mock script: {0}")]
    Io(#[from] std::io::Error),
    #[error("mock script line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedError {
    Transient,
    RateLimit,
    Timeout,
    Auth,
}

impl ScriptedError {
    fn to_provider_error(self) -> ProviderError {
        match self {
            ScriptedError::Transient => ProviderError::Transport("scripted transient failure".into()),
            ScriptedError::RateLimit => ProviderError::RateLimited { retry_after: None },
            ScriptedError::Timeout => ProviderError::Timeout,
            ScriptedError::Auth => ProviderError::Auth("scripted auth failure".into()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptMatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narrative_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circumstance_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    #[serde(rename = "match")]
    pub matcher: ScriptMatch,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ScriptedError>,
}

#[derive(Debug, Clone)]
enum Scripted {
    Respond(String),
    Fail(ScriptedError),
}

/// Offline provider answering from a script.
///
/// Lookup order: `prompt_sha256`, then `(circumstance_id, narrative_id)`,
/// then `narrative_id`, then `circumstance_id`, then the default response.
#[derive(Debug, Clone)]
pub struct MockProvider {
    by_prompt: HashMap<String, Scripted>,
    by_pair: HashMap<(String, String), Scripted>,
    by_narrative: HashMap<String, Scripted>,
    by_circumstance: HashMap<String, Scripted>,
    default_response: String,
}

impl Default for MockProvider {
    fn default() -> Self {
        Self::new(DEFAULT_MOCK_RESPONSE)
    }
}

impl MockProvider {
    pub fn new(default_response: impl Into<String>) -> Self {
        Self {
            by_prompt: HashMap::new(),
            by_pair: HashMap::new(),
            by_narrative: HashMap::new(),
            by_circumstance: HashMap::new(),
            default_response: default_response.into(),
        }
    }

    pub fn from_script_file(path: &Path, default_response: impl Into<String>) -> Result<Self, MockScriptError> {
        let file = std::fs::File::open(path)?;
        let mut mock = Self::new(default_response);
        for (index, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ScriptEntry = serde_json::from_str(&line).map_err(|e| MockScriptError::Malformed {
                line: index + 1,
                message: e.to_string(),
            })?;
            mock.add(entry).map_err(|message| MockScriptError::Malformed {
                line: index + 1,
                message,
            })?;
        }
        Ok(mock)
    }

    pub fn add(&mut self, entry: ScriptEntry) -> Result<(), String> {
        let action = match (entry.response, entry.error) {
            (Some(r), None) => Scripted::Respond(r),
            (None, Some(e)) => Scripted::Fail(e),
            _ => return Err("entry needs exactly one of \"response\" or \"error\"".into()),
        };
        let m = entry.matcher;
        let (previous, key) = match (m.prompt_sha256, m.circumstance_id, m.narrative_id) {
            (Some(sha), None, None) => (self.by_prompt.insert(sha.clone(), action), sha),
            (None, Some(c), Some(n)) => {
                let key = format!("{c}/{n}");
                (self.by_pair.insert((c, n), action), key)
            }
            (None, None, Some(n)) => (self.by_narrative.insert(n.clone(), action), n),
            (None, Some(c), None) => (self.by_circumstance.insert(c.clone(), action), c),
            _ => return Err("match must be prompt_sha256 alone, or narrative_id and/or circumstance_id".into()),
        };
        match previous {
            Some(_) => Err(format!("duplicate match for {key:?}")),
            None => Ok(()),
        }
    }

    pub fn respond_to_narrative(mut self, narrative_id: &str, response: &str) -> Self {
        self.by_narrative
            .insert(narrative_id.to_string(), Scripted::Respond(response.to_string()));
        self
    }

    pub fn fail_narrative(mut self, narrative_id: &str, error: ScriptedError) -> Self {
        self.by_narrative.insert(narrative_id.to_string(), Scripted::Fail(error));
        self
    }

    fn lookup(&self, request: &ChatRequest<'_>) -> Option<&Scripted> {
        if !self.by_prompt.is_empty() {
            if let Some(s) = self.by_prompt.get(&sha256_hex(request.prompt.as_bytes())) {
                return Some(s);
            }
        }
        self.by_pair
            .get(&(request.circumstance_id.to_string(), request.narrative_id.to_string()))
            .or_else(|| self.by_narrative.get(request.narrative_id))
            .or_else(|| self.by_circumstance.get(request.circumstance_id))
    }
}

impl ChatProvider for MockProvider {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, ProviderError> {
        match self.lookup(request) {
            Some(Scripted::Respond(r)) => Ok(r.clone()),
            Some(Scripted::Fail(e)) => Err(e.to_provider_error()),
            None => Ok(self.default_response.clone()),
        }
    }
}

// ---- HTTP ------------------------------------------------------------------

/// Default base URL for providers with a well-known OpenAI-compatible endpoint.
pub fn default_base_url(provider_name: &str) -> Option<&'static str> {
    match provider_name {
        "openai" => Some("https://api.openai.com/v1"),
        "gemini" => Some("https://generativelanguage.googleapis.com/v1beta/openai"),
        "together" => Some("https://api.together.xyz/v1"),
        "groq" => Some("https://api.groq.com/openai/v1"),
        _ => None,
    }
}

/// `POST {base_url}/chat/completions` with bearer auth.
pub struct HttpProvider {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: String,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [WireMessage<'a>; 1],
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireChoiceMessage,
}

#[derive(Deserialize)]
struct WireChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

impl HttpProvider {
    pub fn new(base_url: &str, api_key: String) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            api_key,
        })
    }
}

fn retry_after(headers: &reqwest::header::HeaderMap) -> Option<Duration> {
    headers
        .get(reqwest::header::RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map(Duration::from_secs_f64)
}

impl ChatProvider for HttpProvider {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, ProviderError> {
        let body = WireRequest {
            model: request.model,
            temperature: request.temperature,
            messages: [WireMessage {
                role: "user",
                content: request.prompt,
            }],
        };
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .timeout(request.timeout)
            .json(&body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    ProviderError::Timeout
                } else {
                    ProviderError::Transport(e.to_string())
                }
            })?;

        let status = response.status();
        if status.is_success() {
            let parsed: WireResponse = response.json().map_err(|e| {
                if e.is_timeout() {
                    ProviderError::Timeout
                } else {
                    ProviderError::Transport(format!("invalid response body: {e}"))
                }
            })?;
            return parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .ok_or_else(|| ProviderError::Transport("response has no message content".into()));
        }

        let retry_after = retry_after(response.headers());
        let message = response.text().unwrap_or_default();
        Err(match status.as_u16() {
            401 | 403 => ProviderError::Auth(format!("status {status}: {message}")),
            429 => ProviderError::RateLimited { retry_after },
            408 | 504 => ProviderError::Timeout,
            s if s >= 500 => ProviderError::Transport(format!("status {status}: {message}")),
            s => ProviderError::Rejected { status: s, message },
        })
    }
}
