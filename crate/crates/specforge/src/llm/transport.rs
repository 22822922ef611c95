//! HTTP transport abstraction for the chat-completion client.
//!
//! The trait boundary exists so replay tests can prove no network access
//! happens: a failing test double substitutes for the real transport.

use std::time::Duration;

use thiserror::Error;

/// A single outbound chat-completion request.
#[derive(Debug, Clone)]
pub struct TransportRequest<'a> {
    pub url: &'a str,
    pub api_key: &'a str,
    /// JSON request body, already serialized.
    pub body: &'a str,
}

/// Raw provider reply: HTTP status plus body text.
#[derive(Debug, Clone)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("network error: {0}")]
    Network(String),
}

pub trait ChatTransport: Send + Sync {
    fn send(&self, request: &TransportRequest<'_>) -> Result<TransportResponse, TransportError>;
}

/// Blocking HTTP transport. Non-2xx statuses are returned as data, not
/// errors, so the client can decide what retries.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build();
        HttpTransport {
            agent: config.new_agent(),
        }
    }
}

impl ChatTransport for HttpTransport {
    fn send(&self, request: &TransportRequest<'_>) -> Result<TransportResponse, TransportError> {
        let mut response = self
            .agent
            .post(request.url)
            .header("authorization", format!("Bearer {}", request.api_key))
            .header("content-type", "application/json")
            .send(request.body)
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        Ok(TransportResponse { status, body })
    }
}
