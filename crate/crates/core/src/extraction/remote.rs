//! Chat-completion backed extractor.
//!
//! Request body: `{model, messages: [{role, content}], temperature}` posted to
//! the configured endpoint with a bearer token read from an environment
//! variable. The first text content of the response must hold a JSON array of
//! `{subject, predicate, object}` objects. Every raw response is appended to
//! the audit log before it is parsed.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::media::{MediaId, Sentence};

use super::{CandidateTriple, ExtractionError, ExtractorKind, TripleExtractor};

pub const DEFAULT_PROMPT_TEMPLATE: &str = include_str!("../../assets/extraction_prompt.v1.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorConfig {
    pub endpoint_url: String,
    pub model: String,
    pub api_key_env_var: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_prompt_template")]
    pub prompt_template: String,
    /// Upper bound on concurrent requests per document.
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_max_retries() -> u32 {
    2
}

fn default_prompt_template() -> String {
    DEFAULT_PROMPT_TEMPLATE.to_string()
}

fn default_max_in_flight() -> usize {
    4
}

fn default_timeout_secs() -> u64 {
    60
}

impl ExtractorConfig {
    pub fn new(endpoint_url: impl Into<String>, model: impl Into<String>, api_key_env_var: impl Into<String>) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model: model.into(),
            api_key_env_var: api_key_env_var.into(),
            temperature: 0.0,
            max_retries: default_max_retries(),
            prompt_template: default_prompt_template(),
            max_in_flight: default_max_in_flight(),
            timeout_secs: default_timeout_secs(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !self.prompt_template.contains("{sentence}") {
            return Err("prompt_template must contain a {sentence} placeholder".into());
        }
        if self.max_in_flight == 0 {
            return Err("max_in_flight must be at least 1".into());
        }
        if self.endpoint_url.trim().is_empty() || self.model.trim().is_empty() {
            return Err("endpoint_url and model must be set".into());
        }
        Ok(())
    }

    pub fn render_prompt(&self, sentence: &str) -> String {
        self.prompt_template.replace("{sentence}", sentence)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("endpoint rejected credentials (HTTP {0})")]
    Unauthorized(u16),
    #[error("endpoint returned HTTP {0}: {1}")]
    Status(u16, String),
    #[error("network error: {0}")]
    Network(String),
}

pub trait ChatTransport: Send + Sync {
    /// Returns the raw response body.
    fn send(&self, endpoint: &str, api_key: &str, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Blocking HTTP transport. Must be used from a thread that may block.
pub struct HttpTransport {
    timeout: Duration,
    client: OnceLock<reqwest::blocking::Client>,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        Self { timeout, client: OnceLock::new() }
    }
}

impl ChatTransport for HttpTransport {
    fn send(&self, endpoint: &str, api_key: &str, request: &ChatRequest) -> Result<String, TransportError> {
        let client = self.client.get_or_init(|| {
            reqwest::blocking::Client::builder()
                .timeout(self.timeout)
                .build()
                .unwrap_or_else(|_| reqwest::blocking::Client::new())
        });
        let response = client
            .post(endpoint)
            .bearer_auth(api_key)
            .json(request)
            .send()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = response.status();
        let body = response.text().map_err(|e| TransportError::Network(e.to_string()))?;
        match status.as_u16() {
            401 | 403 => Err(TransportError::Unauthorized(status.as_u16())),
            s if !status.is_success() => Err(TransportError::Status(s, truncate(&body, 200))),
            _ => Ok(body),
        }
    }
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{}…", &s[..i]),
        None => s.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub media_id: MediaId,
    pub sentence_index: usize,
    pub prompt: String,
    pub raw_response: String,
    pub timestamp: DateTime<Utc>,
}

enum AuditSink {
    File(File),
    Memory(Vec<AuditEntry>),
}

/// Append-only JSON-lines record of every remote exchange.
pub struct AuditLog {
    sink: Mutex<AuditSink>,
}

impl AuditLog {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { sink: Mutex::new(AuditSink::File(file)) })
    }

    pub fn in_memory() -> Self {
        Self { sink: Mutex::new(AuditSink::Memory(Vec::new())) }
    }

    pub fn record(&self, entry: AuditEntry) {
        let mut sink = self.sink.lock().unwrap_or_else(|p| p.into_inner());
        match &mut *sink {
            AuditSink::File(f) => {
                let line = serde_json::to_string(&entry).expect("audit entries serialize");
                if let Err(e) = writeln!(f, "{line}") {
                    log::error!("audit log write failed: {e}");
                }
            }
            AuditSink::Memory(v) => v.push(entry),
        }
    }

    /// Entries held by an in-memory log; empty for file logs.
    pub fn entries(&self) -> Vec<AuditEntry> {
        match &*self.sink.lock().unwrap_or_else(|p| p.into_inner()) {
            AuditSink::Memory(v) => v.clone(),
            AuditSink::File(_) => Vec::new(),
        }
    }
}

pub struct RemoteExtractor<T: ChatTransport> {
    config: ExtractorConfig,
    transport: T,
    audit: AuditLog,
}

impl<T: ChatTransport> RemoteExtractor<T> {
    pub fn new(config: ExtractorConfig, transport: T, audit: AuditLog) -> Self {
        Self { config, transport, audit }
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    pub fn extract_remote(
        &self,
        media_id: &MediaId,
        sentence: &Sentence,
    ) -> Result<Vec<CandidateTriple>, ExtractionError> {
        let api_key = std::env::var(&self.config.api_key_env_var).map_err(|_| {
            ExtractionError::Auth(format!("environment variable `{}` is not set", self.config.api_key_env_var))
        })?;
        let prompt = self.config.render_prompt(&sentence.text);
        let request = ChatRequest {
            model: self.config.model.clone(),
            messages: vec![ChatMessage { role: "user".into(), content: prompt.clone() }],
            temperature: self.config.temperature,
        };
        let mut last_problem = String::new();
        for attempt in 0..=self.config.max_retries {
            let raw = self
                .transport
                .send(&self.config.endpoint_url, &api_key, &request)
                .map_err(|e| match e {
                    TransportError::Unauthorized(_) => ExtractionError::Auth(e.to_string()),
                    other => ExtractionError::Transport(other.to_string()),
                })?;
            self.audit.record(AuditEntry {
                media_id: media_id.clone(),
                sentence_index: sentence.index,
                prompt: prompt.clone(),
                raw_response: raw.clone(),
                timestamp: Utc::now(),
            });
            match parse_response(&raw) {
                Ok(items) => {
                    return Ok(items
                        .into_iter()
                        .map(|t| CandidateTriple {
                            raw_subject: t.subject.trim().to_string(),
                            raw_predicate: t.predicate.trim().to_string(),
                            raw_object: t.object.trim().to_string(),
                            sentence_index: sentence.index,
                            extractor: ExtractorKind::Remote { model: self.config.model.clone() },
                            attempt,
                        })
                        .collect())
                }
                Err(problem) => {
                    log::warn!(
                        "media {media_id} sentence {}: malformed response on attempt {attempt}: {problem}",
                        sentence.index
                    );
                    last_problem = problem;
                }
            }
        }
        Err(ExtractionError::Failed(format!(
            "no valid triple array after {} attempt(s): {last_problem}",
            self.config.max_retries + 1
        )))
    }
}

impl<T: ChatTransport> TripleExtractor for RemoteExtractor<T> {
    fn kind(&self) -> ExtractorKind {
        ExtractorKind::Remote { model: self.config.model.clone() }
    }

    fn extract(&self, media_id: &MediaId, sentence: &Sentence) -> Result<Vec<CandidateTriple>, ExtractionError> {
        self.extract_remote(media_id, sentence)
    }

    fn max_in_flight(&self) -> usize {
        self.config.max_in_flight
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RawTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

/// Pulls the triple array out of a chat-completion response body.
pub fn parse_response(body: &str) -> Result<Vec<RawTriple>, String> {
    let text = match serde_json::from_str::<Value>(body) {
        Ok(Value::Array(_)) => body.to_string(),
        Ok(v) => first_text_content(&v).ok_or("response has no text content")?,
        Err(_) => body.to_string(),
    };
    parse_triple_array(&text)
}

fn first_text_content(v: &Value) -> Option<String> {
    let candidates = [
        v.pointer("/choices/0/message/content"),
        v.pointer("/choices/0/text"),
        v.pointer("/message/content"),
        v.pointer("/content"),
        v.pointer("/output_text"),
    ];
    candidates.into_iter().flatten().find_map(text_of)
}

fn text_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => parts.iter().find_map(|p| match p {
            Value::String(s) => Some(s.clone()),
            other => other.get("text").and_then(Value::as_str).map(str::to_string),
        }),
        _ => None,
    }
}

fn parse_triple_array(text: &str) -> Result<Vec<RawTriple>, String> {
    let start = text.find('[').ok_or("no JSON array in response")?;
    let end = text.rfind(']').filter(|&e| e > start).ok_or("unterminated JSON array in response")?;
    let items: Vec<RawTriple> =
        serde_json::from_str(&text[start..=end]).map_err(|e| format!("array does not match schema: {e}"))?;
    for item in &items {
        if item.subject.trim().is_empty() || item.predicate.trim().is_empty() || item.object.trim().is_empty() {
            return Err("triple with an empty field".into());
        }
    }
    Ok(items)
}
