//! Uniform interface to captioning/summarization/judging model backends.
//!
//! A [`ModelBackend`] produces text for a [`ModelRequest`]. The
//! [`ModelClient`] wraps a backend with the cross-cutting machinery every
//! stage relies on: an on-disk response cache keyed by [`request_key`],
//! retry with exponential backoff on transient transport failures, a
//! token-bucket rate limiter, and an append-only cost ledger.
//!
//! Backends:
//! * [`replay::ReplayBackend`]: scripted responses from a JSON-lines
//!   fixture file; the deterministic offline path every test uses.
//! * [`replay::RecordingBackend`]: wraps any backend and appends each
//!   response to a fixture file, so a live run becomes a reproducible one.
//! * [`scripted::ScriptedBackend`]: rule-based offline stand-in useful for
//!   smoke tests and fixture bootstrapping.
//! * [`http::HttpBackend`]: minimal JSON-over-HTTP provider adapter.

pub mod cache;
pub mod config;
pub mod http;
pub mod ledger;
pub mod limiter;
pub mod replay;
pub mod scripted;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::ResponseCache;
pub use config::{BackendConfig, BackendKind, RateLimitConfig};
pub use ledger::{CostLedger, LedgerEntry, ModelPrice, PriceTable};
pub use limiter::RateLimiter;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend unavailable after {attempts} attempts: {last_error}")]
    BackendUnavailable { attempts: u32, last_error: String },
    #[error("prompt too long: {0}")]
    PromptTooLong(String),
    #[error("no replay fixture for request key {key}")]
    ReplayMiss { key: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed fixture or cache data: {0}")]
    Data(String),
}

/// Pipeline stage issuing the request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Captioner,
    Summarizer,
    Judge,
}

impl Role {
    fn as_str(self) -> &'static str {
        match self {
            Role::Captioner => "captioner",
            Role::Summarizer => "summarizer",
            Role::Judge => "judge",
        }
    }
}

/// How a provider should sample frames from an attached clip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FramePolicy {
    FramesPerSecond(f64),
    MaxFrames(u32),
}

impl Default for FramePolicy {
    fn default() -> Self {
        FramePolicy::FramesPerSecond(1.0)
    }
}

impl FramePolicy {
    fn descriptor(&self) -> String {
        match self {
            FramePolicy::FramesPerSecond(fps) => format!("fps={fps:?}"),
            FramePolicy::MaxFrames(n) => format!("max_frames={n}"),
        }
    }
}

/// Reference to clip media attached to a captioning request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaRef {
    /// Clip locator: a sliced clip path, or a synthetic `video:<id>#a-b`
    /// reference when no sliced file exists.
    pub clip: String,
    pub frame_policy: FramePolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub max_output_tokens: Option<u32>,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            max_output_tokens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRequest {
    pub role: Role,
    pub model_id: String,
    pub prompt_text: String,
    pub media: Option<MediaRef>,
    pub params: GenerationParams,
}

impl ModelRequest {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.prompt_text.is_empty() {
            return Err(ModelError::InvalidRequest("empty prompt".into()));
        }
        if self.media.is_some() && self.role != Role::Captioner {
            return Err(ModelError::InvalidRequest(format!(
                "media attached to a {} request; only captioner requests carry media",
                self.role.as_str()
            )));
        }
        Ok(())
    }

    pub fn key(&self) -> String {
        request_key(self)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    pub usage: Usage,
    pub latency_ms: u64,
}

/// Stable content digest of a request. Fields are folded in a fixed order
/// with length framing, so the key is independent of any serialization
/// quirks; prompt text is hashed verbatim (no whitespace normalization).
pub fn request_key(req: &ModelRequest) -> String {
    let media_desc = req
        .media
        .as_ref()
        .map(|m| format!("{}|{}", m.clip, m.frame_policy.descriptor()))
        .unwrap_or_default();
    let max_tokens = req
        .params
        .max_output_tokens
        .map(|n| n.to_string())
        .unwrap_or_else(|| "none".into());
    let temperature = format!("{:?}", req.params.temperature);

    let mut hasher = Sha256::new();
    for (tag, value) in [
        ("role", req.role.as_str()),
        ("model", req.model_id.as_str()),
        ("prompt", req.prompt_text.as_str()),
        ("media", media_desc.as_str()),
        ("temperature", temperature.as_str()),
        ("max_output_tokens", max_tokens.as_str()),
    ] {
        hasher.update(tag.as_bytes());
        hasher.update(b":");
        hasher.update(value.len().to_string().as_bytes());
        hasher.update(b":");
        hasher.update(value.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Fallback token estimate when a backend reports no usage: ceil(bytes / 4).
/// Backend-reported usage always wins over this estimate.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.len() as u64).div_ceil(4)
}

/// A completion provider. Implementations must be callable concurrently.
pub trait ModelBackend: Send + Sync {
    fn complete(&self, req: &ModelRequest) -> Result<ModelResponse, ModelError>;
}

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            base_delay: Duration::from_millis(200),
            max_delay: Duration::from_secs(10),
        }
    }
}

impl RetryPolicy {
    fn delay_for(&self, attempt: u32) -> Duration {
        let exp = self.base_delay.saturating_mul(1u32 << attempt.min(16));
        exp.min(self.max_delay)
    }
}

/// Backend wrapper adding caching, retries, rate limiting and cost tracking.
pub struct ModelClient {
    backend: Box<dyn ModelBackend>,
    model_id: String,
    default_params: GenerationParams,
    frame_policy: FramePolicy,
    cache: Option<ResponseCache>,
    ledger: Mutex<CostLedger>,
    limiter: Option<RateLimiter>,
    retry: RetryPolicy,
    backend_calls: AtomicU64,
}

impl ModelClient {
    pub fn new(backend: Box<dyn ModelBackend>, model_id: impl Into<String>) -> Self {
        Self {
            backend,
            model_id: model_id.into(),
            default_params: GenerationParams::default(),
            frame_policy: FramePolicy::default(),
            cache: None,
            ledger: Mutex::new(CostLedger::default()),
            limiter: None,
            retry: RetryPolicy::default(),
            backend_calls: AtomicU64::new(0),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_prices(mut self, prices: PriceTable) -> Self {
        self.ledger = Mutex::new(CostLedger::new(prices));
        self
    }

    pub fn with_rate_limiter(mut self, limiter: RateLimiter) -> Self {
        self.limiter = Some(limiter);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_params(mut self, params: GenerationParams) -> Self {
        self.default_params = params;
        self
    }

    pub fn with_frame_policy(mut self, policy: FramePolicy) -> Self {
        self.frame_policy = policy;
        self
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    /// Build a text-only request with this client's model and parameters.
    pub fn request(&self, role: Role, prompt_text: impl Into<String>) -> ModelRequest {
        ModelRequest {
            role,
            model_id: self.model_id.clone(),
            prompt_text: prompt_text.into(),
            media: None,
            params: self.default_params,
        }
    }

    /// Build a captioning request carrying a clip reference at this client's
    /// frame policy.
    pub fn request_with_media(
        &self,
        role: Role,
        prompt_text: impl Into<String>,
        clip: impl Into<String>,
    ) -> ModelRequest {
        ModelRequest {
            media: Some(MediaRef {
                clip: clip.into(),
                frame_policy: self.frame_policy,
            }),
            ..self.request(role, prompt_text)
        }
    }

    /// Complete a request. Cache hits never reach the backend and leave the
    /// ledger untouched; transient transport failures are retried with
    /// exponential backoff up to the policy limit.
    pub fn complete(&self, req: &ModelRequest) -> Result<ModelResponse, ModelError> {
        req.validate()?;
        let key = request_key(req);

        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(&key)? {
                return Ok(hit);
            }
        }

        if let Some(limiter) = &self.limiter {
            limiter.acquire();
        }

        let mut last_error = String::new();
        let mut response = None;
        for attempt in 0..self.retry.max_attempts {
            match self.backend.complete(req) {
                Ok(resp) => {
                    response = Some(resp);
                    break;
                }
                Err(ModelError::Transport(msg)) => {
                    last_error = msg;
                    if attempt + 1 < self.retry.max_attempts {
                        std::thread::sleep(self.retry.delay_for(attempt));
                    }
                }
                Err(other) => return Err(other),
            }
        }
        let response = response.ok_or(ModelError::BackendUnavailable {
            attempts: self.retry.max_attempts,
            last_error,
        })?;

        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        self.ledger
            .lock()
            .expect("ledger lock poisoned")
            .record(&key, &self.model_id, response.usage);

        if let Some(cache) = &self.cache {
            cache.put(&key, &response)?;
        }
        Ok(response)
    }

    /// Number of completions actually served by the backend (cache hits not
    /// included).
    pub fn backend_calls(&self) -> u64 {
        self.backend_calls.load(Ordering::Relaxed)
    }

    pub fn total_cost_usd(&self) -> f64 {
        self.ledger.lock().expect("ledger lock poisoned").total_cost_usd()
    }

    pub fn ledger_snapshot(&self) -> CostLedger {
        self.ledger.lock().expect("ledger lock poisoned").clone()
    }
}
