//! Text-completion service used by query generation, rewriting, and
//! verification. Shares the transport layer (and thus fixture
//! record/replay) with the embedding providers.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::embed::{RetryPolicy, Transport, TransportError};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("llm transport failed: {0}")]
    Transport(#[from] TransportError),
    #[error("llm response malformed: {0}")]
    MalformedResponse(String),
}

/// Anything that can complete a rendered prompt. The pipeline only needs
/// the raw completion text; stages parse their own structured output.
pub trait LlmService: Sync {
    fn complete(
        &self,
        template_id: &str,
        variables: &BTreeMap<String, String>,
    ) -> Result<String, LlmError>;
}

#[derive(Deserialize)]
struct WireCompletion {
    text: String,
}

/// Calls a completion endpoint speaking
/// `{"prompt_template_id": ..., "variables": {...}}` → `{"text": ...}`.
///
/// Retries transient transport failures with exponential backoff, same
/// policy shape as the embedding dispatcher.
pub struct HttpLlmService {
    endpoint: String,
    transport: Arc<dyn Transport>,
    retry: RetryPolicy,
}

impl HttpLlmService {
    pub fn new(endpoint: impl Into<String>, transport: Arc<dyn Transport>) -> Self {
        Self {
            endpoint: endpoint.into(),
            transport,
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl LlmService for HttpLlmService {
    fn complete(
        &self,
        template_id: &str,
        variables: &BTreeMap<String, String>,
    ) -> Result<String, LlmError> {
        let body = serde_json::json!({
            "prompt_template_id": template_id,
            "variables": variables,
        });
        let mut attempt = 0;
        let response = loop {
            match self.transport.post_json(&self.endpoint, &body) {
                Ok(value) => break value,
                Err(err) if err.is_retryable() && attempt < self.retry.max_retries => {
                    attempt += 1;
                    std::thread::sleep(self.retry.delay_before_retry(attempt));
                }
                Err(err) => return Err(err.into()),
            }
        };
        let completion: WireCompletion = serde_json::from_value(response)
            .map_err(|e| LlmError::MalformedResponse(format!("expected a text field: {e}")))?;
        Ok(completion.text)
    }
}

/// Strip a Markdown code fence if the completion arrived wrapped in one,
/// then parse the remainder as JSON.
pub(crate) fn parse_completion_json(text: &str) -> Result<serde_json::Value, serde_json::Error> {
    let trimmed = text.trim();
    let inner = trimmed
        .strip_prefix("```json")
        .or_else(|| trimmed.strip_prefix("```"))
        .and_then(|rest| rest.strip_suffix("```"))
        .map(str::trim)
        .unwrap_or(trimmed);
    serde_json::from_str(inner)
}
