//! Chat-completion backends.
//!
//! Every backend implements the same blocking [`ChatBackend`] contract:
//! the live HTTP client (retry, rate limit), the content-addressed file
//! cache that wraps any backend, and the scripted replay backend used
//! for deterministic runs and tests.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod cache;
pub mod live;
pub mod replay;

pub use cache::{cache_key, CacheKey, CachedBackend, FileCache};
pub use live::{LiveBackend, LiveConfig};
pub use replay::ReplayBackend;

/// Name of the environment variable carrying the API credential.
/// Credentials are never read from configuration files.
pub const API_KEY_ENV: &str = "IDIOMLEX_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: &str) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: &str) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: &str) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// Decoding parameters plus the sample index that distinguishes repeated
/// stochastic draws of the same prompt (each draw caches separately).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub sample_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub params: GenerationParams,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.messages.is_empty() {
            return Err(BackendError::InvalidRequest("empty message list".into()));
        }
        if self.messages.last().map(|m| m.role) != Some(Role::User) {
            return Err(BackendError::InvalidRequest("last message must be a user turn".into()));
        }
        if self.messages.iter().any(|m| m.role != Role::System && m.content.is_empty()) {
            return Err(BackendError::InvalidRequest("empty user/assistant content".into()));
        }
        if !(0.0..=2.0).contains(&self.params.temperature) {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.params.temperature
            )));
        }
        if self.params.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }

    /// The content of the final user message.
    pub fn last_user_content(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendResponse {
    pub text: String,
    pub backend_id: String,
    pub cached: bool,
    pub latency_ms: u64,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("rate limited after exhausting retries")]
    RateLimited,
    #[error("response truncated or empty")]
    Truncated,
    #[error("transport failure: {0}")]
    TransportFailure(String),
    #[error("no credential configured: set {0}")]
    AuthMissing(&'static str),
    #[error("no canned response for request: {0}")]
    MissingFixture(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization failure: {0}")]
    Serialization(#[from] serde_json::Error),
}

/// Blocking chat-completion contract. Implementations must be safe for
/// concurrent use from the worker pool.
pub trait ChatBackend: Send + Sync {
    /// Stable identifier; it participates in cache keys.
    fn id(&self) -> &str;

    fn complete(&self, request: &ChatRequest) -> Result<BackendResponse, BackendError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for &T {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, request: &ChatRequest) -> Result<BackendResponse, BackendError> {
        (**self).complete(request)
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for Box<T> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, request: &ChatRequest) -> Result<BackendResponse, BackendError> {
        (**self).complete(request)
    }
}

/// Instrumentation wrapper that counts how many completions reach the
/// inner backend. Cache-discipline tests assert the count stays flat on
/// a warm second run.
pub struct CountingBackend<B> {
    inner: B,
    calls: AtomicU64,
}

impl<B: ChatBackend> CountingBackend<B> {
    pub fn new(inner: B) -> Self {
        Self { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<B: ChatBackend> ChatBackend for CountingBackend<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, request: &ChatRequest) -> Result<BackendResponse, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(request)
    }
}
