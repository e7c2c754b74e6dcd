//! Live HTTP chat-completion backend.
//!
//! Speaks the common JSON chat-completions wire format against a
//! configurable base URL. Transient failures (429 and 5xx, plus transport
//! errors) are retried with exponential backoff; admission is gated by a
//! token-bucket limiter so the process stays under a requests-per-minute
//! ceiling. The credential comes from the `IDIOMLEX_API_KEY` environment
//! variable only.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{BackendError, BackendResponse, ChatBackend, ChatMessage, ChatRequest, API_KEY_ENV};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveConfig {
    /// Base URL of the chat-completions service, without the
    /// `/chat/completions` suffix.
    pub base_url: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub retry_base_ms: u64,
    pub requests_per_minute: u32,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            timeout_secs: 60,
            max_retries: 3,
            retry_base_ms: 500,
            requests_per_minute: 60,
        }
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Token bucket: capacity of one minute's worth of requests, refilled
/// continuously.
struct TokenBucket {
    tokens: f64,
    capacity: f64,
    refill_per_sec: f64,
    last: Instant,
}

impl TokenBucket {
    fn new(requests_per_minute: u32) -> Self {
        let capacity = f64::from(requests_per_minute.max(1));
        Self { tokens: capacity, capacity, refill_per_sec: capacity / 60.0, last: Instant::now() }
    }

    /// Time to wait before one token is available; takes the token.
    fn acquire(&mut self) -> Duration {
        let now = Instant::now();
        self.tokens = (self.tokens
            + now.duration_since(self.last).as_secs_f64() * self.refill_per_sec)
            .min(self.capacity);
        self.last = now;
        if self.tokens >= 1.0 {
            self.tokens -= 1.0;
            Duration::ZERO
        } else {
            let wait = (1.0 - self.tokens) / self.refill_per_sec;
            self.tokens -= 1.0;
            Duration::from_secs_f64(wait)
        }
    }
}

pub struct LiveBackend {
    id: String,
    config: LiveConfig,
    api_key: String,
    client: reqwest::blocking::Client,
    bucket: Mutex<TokenBucket>,
}

impl LiveBackend {
    /// Builds the backend, reading the credential from the environment.
    pub fn new(config: LiveConfig) -> Result<Self, BackendError> {
        let api_key =
            std::env::var(API_KEY_ENV).map_err(|_| BackendError::AuthMissing(API_KEY_ENV))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::TransportFailure(e.to_string()))?;
        let bucket = Mutex::new(TokenBucket::new(config.requests_per_minute));
        Ok(Self { id: "live".into(), config, api_key, client, bucket })
    }

    fn throttle(&self) {
        let wait = self.bucket.lock().unwrap().acquire();
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }

    fn attempt(&self, request: &ChatRequest) -> Result<BackendResponse, AttemptError> {
        let body = WireRequest {
            model: &request.params.model,
            messages: &request.messages,
            temperature: request.params.temperature,
            max_tokens: request.params.max_tokens,
        };
        let started = Instant::now();
        let response = self
            .client
            .post(format!("{}/chat/completions", self.config.base_url.trim_end_matches('/')))
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| AttemptError::Retryable(e.to_string()))?;

        let status = response.status();
        if status.as_u16() == 429 {
            return Err(AttemptError::RateLimited);
        }
        if status.is_server_error() {
            return Err(AttemptError::Retryable(format!("server error {status}")));
        }
        if !status.is_success() {
            return Err(AttemptError::Fatal(BackendError::TransportFailure(format!(
                "status {status}"
            ))));
        }

        let wire: WireResponse = response
            .json()
            .map_err(|e| AttemptError::Fatal(BackendError::TransportFailure(e.to_string())))?;
        let choice =
            wire.choices.into_iter().next().ok_or(AttemptError::Fatal(BackendError::Truncated))?;
        let truncated = choice.finish_reason.as_deref() == Some("length");
        let text = choice.message.content.unwrap_or_default();
        if text.is_empty() || truncated {
            return Err(AttemptError::Fatal(BackendError::Truncated));
        }
        Ok(BackendResponse {
            text,
            backend_id: self.id.clone(),
            cached: false,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}

enum AttemptError {
    RateLimited,
    Retryable(String),
    Fatal(BackendError),
}

impl ChatBackend for LiveBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &ChatRequest) -> Result<BackendResponse, BackendError> {
        request.validate()?;
        let mut last_rate_limited = false;
        for attempt in 0..=self.config.max_retries {
            self.throttle();
            match self.attempt(request) {
                Ok(response) => return Ok(response),
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::RateLimited) => last_rate_limited = true,
                Err(AttemptError::Retryable(reason)) => {
                    last_rate_limited = false;
                    log::warn!("attempt {} failed: {reason}", attempt + 1);
                    if attempt == self.config.max_retries {
                        return Err(BackendError::TransportFailure(reason));
                    }
                }
            }
            if attempt < self.config.max_retries {
                let backoff = self.config.retry_base_ms.saturating_mul(1u64 << attempt.min(16));
                std::thread::sleep(Duration::from_millis(backoff));
            }
        }
        if last_rate_limited {
            Err(BackendError::RateLimited)
        } else {
            Err(BackendError::TransportFailure("retries exhausted".into()))
        }
    }
}
