//! Provider-agnostic chat-completion client with reasoning/answer
//! separation and a persistent record/replay cache.
//!
//! The wire shape is the least-common-denominator JSON chat request
//! (`model`, `temperature`, `messages`); the reasoning text is read from
//! the provider's reasoning channel when present and left empty otherwise.

mod cache;
mod transport;

pub use cache::{CacheEntry, ReplayCache};
pub use transport::{
    ChatTransport, HttpTransport, TransportError, TransportRequest, TransportResponse,
};

use std::fmt;
use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant, SystemTime};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable holding the provider API key.
pub const API_KEY_ENV: &str = "SPECFORGE_API_KEY";

/// One sampled completion request.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub prompt: String,
    /// Which of the N samples for this prompt this request is.
    pub sample_index: u32,
}

impl ChatRequest {
    /// Digest keying the cache: model, temperature, prompt.
    pub fn digest(&self) -> String {
        crate::prompt::digest(
            &self.prompt,
            &crate::prompt::ModelParams {
                model: self.model.clone(),
                temperature: self.temperature,
            },
        )
    }
}

/// Token accounting as reported by the provider.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// A provider reply split into reasoning and answer channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    /// Chain-of-thought text; empty for non-reasoning models.
    pub reasoning: String,
    pub answer: String,
    pub usage: Usage,
    pub latency_ms: u64,
}

/// How `complete` sources its responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClientMode {
    /// Network call, nothing cached.
    Live,
    /// Network call, response cached (write-once).
    Record,
    /// Cache only; a miss is an error and no socket is ever opened.
    ReplayStrict,
    /// Cache hit when present, otherwise live call plus cache write.
    ReplayFallback,
}

impl fmt::Display for ClientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClientMode::Live => "live",
            ClientMode::Record => "record",
            ClientMode::ReplayStrict => "replay-strict",
            ClientMode::ReplayFallback => "replay-fallback",
        };
        f.write_str(s)
    }
}

/// Retry policy for rate-limited and transient failures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetryConfig {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryConfig {
    fn default() -> Self {
        RetryConfig {
            max_attempts: 3,
            base_delay_ms: 500,
        }
    }
}

/// Client configuration; see the pipeline config file for the on-disk form.
#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_in_flight: usize,
    pub retry: RetryConfig,
    pub timeout: Duration,
    /// Overrides the `SPECFORGE_API_KEY` environment variable when set.
    pub api_key: Option<String>,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            base_url: "https://api.deepseek.com".into(),
            model: "deepseek-reasoner".into(),
            temperature: 0.7,
            max_in_flight: 4,
            retry: RetryConfig::default(),
            timeout: Duration::from_secs(300),
            api_key: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("no API key: set {API_KEY_ENV} or configure client.api_key")]
    AuthMissing,
    #[error("provider returned HTTP {status}: {body_tail}")]
    HttpError { status: u16, body_tail: String },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("cache miss for {}", path.display())]
    CacheMiss { path: PathBuf },
    #[error("malformed provider payload: {0}")]
    MalformedProviderPayload(String),
    #[error("cache entry {} already exists with different content", path.display())]
    CacheConflict { path: PathBuf },
    #[error("malformed cache entry {}: {cause}", path.display())]
    MalformedCacheEntry { path: PathBuf, cause: String },
    #[error("transport: {0}")]
    Transport(#[from] TransportError),
    #[error("io error on {}: {cause}", path.display())]
    Io { path: PathBuf, cause: String },
}

/// A completion plus its cache provenance. `recorded_at` comes from the
/// cache entry on replay so downstream records stay byte-deterministic.
#[derive(Debug, Clone)]
pub struct Completion {
    pub response: ChatResponse,
    pub recorded_at: u64,
    pub from_cache: bool,
}

/// Counting semaphore bounding in-flight provider calls.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphoreGuard { semaphore: self }
    }
}

struct SemaphoreGuard<'a> {
    semaphore: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        *self.semaphore.permits.lock().unwrap() += 1;
        self.semaphore.available.notify_one();
    }
}

/// Chat-completion client, shareable across worker threads.
pub struct ChatClient {
    transport: Box<dyn ChatTransport>,
    cache: Option<ReplayCache>,
    config: ClientConfig,
    semaphore: Semaphore,
}

impl ChatClient {
    pub fn new(config: ClientConfig, cache: Option<ReplayCache>) -> Self {
        let transport = Box::new(HttpTransport::new(config.timeout));
        Self::with_transport(config, cache, transport)
    }

    pub fn with_transport(
        config: ClientConfig,
        cache: Option<ReplayCache>,
        transport: Box<dyn ChatTransport>,
    ) -> Self {
        let semaphore = Semaphore::new(config.max_in_flight);
        ChatClient {
            transport,
            cache,
            config,
            semaphore,
        }
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    /// Build the request this client would send for a prompt.
    pub fn request(&self, prompt: String, sample_index: u32) -> ChatRequest {
        ChatRequest {
            model: self.config.model.clone(),
            temperature: self.config.temperature,
            prompt,
            sample_index,
        }
    }

    /// Complete one request under the given mode.
    pub fn complete(
        &self,
        request: &ChatRequest,
        mode: ClientMode,
    ) -> Result<Completion, LlmError> {
        let digest = request.digest();

        if matches!(mode, ClientMode::ReplayStrict | ClientMode::ReplayFallback) {
            let cache = self.cache.as_ref().ok_or_else(|| LlmError::CacheMiss {
                path: PathBuf::from("<no cache configured>"),
            })?;
            match cache.read(&digest, request.sample_index)? {
                Some(entry) => {
                    return Ok(Completion {
                        response: ChatResponse {
                            reasoning: entry.reasoning,
                            answer: entry.answer,
                            usage: entry.usage,
                            latency_ms: entry.latency_ms,
                        },
                        recorded_at: entry.recorded_at,
                        from_cache: true,
                    })
                }
                None if mode == ClientMode::ReplayStrict => {
                    return Err(LlmError::CacheMiss {
                        path: cache.key_path(&digest, request.sample_index),
                    })
                }
                None => {}
            }
        }

        let response = self.call_provider(request)?;
        let recorded_at = SystemTime::now()
            .duration_since(SystemTime::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());

        if matches!(mode, ClientMode::Record | ClientMode::ReplayFallback) {
            let cache = self.cache.as_ref().ok_or_else(|| LlmError::CacheMiss {
                path: PathBuf::from("<no cache configured>"),
            })?;
            cache.write(&CacheEntry {
                request_digest: digest,
                sample_index: request.sample_index,
                model: request.model.clone(),
                temperature: request.temperature,
                reasoning: response.reasoning.clone(),
                answer: response.answer.clone(),
                usage: response.usage,
                latency_ms: response.latency_ms,
                recorded_at,
            })?;
        }

        Ok(Completion {
            response,
            recorded_at,
            from_cache: false,
        })
    }

    fn call_provider(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let api_key = match &self.config.api_key {
            Some(key) => key.clone(),
            None => std::env::var(API_KEY_ENV).map_err(|_| LlmError::AuthMissing)?,
        };
        let url = format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        );
        let body = serde_json::json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": [{ "role": "user", "content": request.prompt }],
        })
        .to_string();

        let _permit = self.semaphore.acquire();
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let started = Instant::now();
            let outcome = self.transport.send(&TransportRequest {
                url: &url,
                api_key: &api_key,
                body: &body,
            });
            let latency_ms = started.elapsed().as_millis() as u64;

            let retriable_failure = match outcome {
                Ok(reply) if reply.status == 429 => true,
                Ok(reply) if (500..600).contains(&reply.status) => {
                    if attempt >= self.config.retry.max_attempts {
                        return Err(LlmError::HttpError {
                            status: reply.status,
                            body_tail: tail(&reply.body),
                        });
                    }
                    true
                }
                Ok(reply) if !(200..300).contains(&reply.status) => {
                    return Err(LlmError::HttpError {
                        status: reply.status,
                        body_tail: tail(&reply.body),
                    })
                }
                Ok(reply) => return parse_provider_payload(&reply.body, latency_ms),
                Err(_) if attempt < self.config.retry.max_attempts => true,
                Err(e) => return Err(e.into()),
            };

            if retriable_failure {
                if attempt >= self.config.retry.max_attempts {
                    return Err(LlmError::RateLimited { attempts: attempt });
                }
                let delay = self
                    .config
                    .retry
                    .base_delay_ms
                    .saturating_mul(1u64 << (attempt - 1).min(16));
                std::thread::sleep(Duration::from_millis(delay));
            }
        }
    }
}

fn tail(body: &str) -> String {
    const MAX: usize = 200;
    if body.len() <= MAX {
        body.to_string()
    } else {
        body[body.len() - MAX..].to_string()
    }
}

/// Parse a chat-completion reply: answer from `message.content`, reasoning
/// from the provider's reasoning channel when present.
fn parse_provider_payload(body: &str, latency_ms: u64) -> Result<ChatResponse, LlmError> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| LlmError::MalformedProviderPayload(e.to_string()))?;
    let message = value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .ok_or_else(|| LlmError::MalformedProviderPayload("missing choices[0].message".into()))?;
    let answer = message
        .get("content")
        .and_then(|c| c.as_str())
        .unwrap_or("")
        .to_string();
    if answer.is_empty() {
        return Err(LlmError::MalformedProviderPayload(
            "empty answer content".into(),
        ));
    }
    let reasoning = message
        .get("reasoning_content")
        .or_else(|| message.get("reasoning"))
        .and_then(|c| c.as_str())
        .unwrap_or("")
        .to_string();
    let usage = Usage {
        prompt_tokens: value
            .pointer("/usage/prompt_tokens")
            .and_then(|v| v.as_u64())
            .unwrap_or(0),
        completion_tokens: value
            .pointer("/usage/completion_tokens")
            .and_then(|v| v.as_u64())
            .unwrap_or(0),
    };
    Ok(ChatResponse {
        reasoning,
        answer,
        usage,
        latency_ms,
    })
}
