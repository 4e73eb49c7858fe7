//! JSON-over-HTTP transport for remote providers, with record/replay
//! fixtures so pipelines and tests can run without network access.
//!
//! Requests are keyed by a hash of their canonical JSON encoding; recording
//! writes one `{key}.json` file per distinct request, replaying serves the
//! stored response for the same key and fails loudly on a miss.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Environment variable holding the bearer token for remote endpoints.
pub const AUTH_TOKEN_ENV: &str = "TEXRANK_PROVIDER_TOKEN";

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("network error calling {endpoint}: {detail}")]
    Network { endpoint: String, detail: String },
    #[error("HTTP {status} from {endpoint}: {detail}")]
    Http {
        status: u16,
        endpoint: String,
        detail: String,
    },
    #[error("response was not valid JSON: {0}")]
    Json(String),
    #[error("no recorded fixture for request {key} (endpoint {endpoint})")]
    MissingFixture { key: String, endpoint: String },
    #[error("fixture I/O error at {path}: {source}")]
    FixtureIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TransportError {
    /// Whether a retry could plausibly succeed: transient network failures
    /// and server-side errors, but not client errors or fixture misses.
    pub fn is_retryable(&self) -> bool {
        match self {
            TransportError::Network { .. } => true,
            TransportError::Http { status, .. } => *status >= 500 || *status == 429,
            _ => false,
        }
    }
}

/// Anything that can answer a JSON POST.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        endpoint: &str,
        body: &serde_json::Value,
    ) -> Result<serde_json::Value, TransportError>;
}

/// Key identifying a request: SHA-256 over the endpoint and the canonical
/// (sorted-key) JSON body. Stable across processes and field orderings.
pub fn request_key(endpoint: &str, body: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(body).expect("JSON value serializes");
    let mut hasher = Sha256::new();
    hasher.update(endpoint.as_bytes());
    hasher.update(b"\n");
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Live HTTP transport. Reads the bearer token from [`AUTH_TOKEN_ENV`] at
/// construction; absent means unauthenticated requests.
pub struct HttpTransport {
    agent: ureq::Agent,
    token: Option<String>,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Self {
            agent,
            token: std::env::var(AUTH_TOKEN_ENV).ok(),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl Transport for HttpTransport {
    fn post_json(
        &self,
        endpoint: &str,
        body: &serde_json::Value,
    ) -> Result<serde_json::Value, TransportError> {
        let mut request = self.agent.post(endpoint);
        if let Some(token) = &self.token {
            request = request.header("authorization", &format!("Bearer {token}"));
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| TransportError::Network {
                endpoint: endpoint.to_string(),
                detail: e.to_string(),
            })?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            let detail = response
                .body_mut()
                .read_to_string()
                .unwrap_or_else(|_| "<unreadable body>".into());
            return Err(TransportError::Http {
                status,
                endpoint: endpoint.to_string(),
                detail: detail.chars().take(500).collect(),
            });
        }
        response
            .body_mut()
            .read_json()
            .map_err(|e| TransportError::Json(e.to_string()))
    }
}

/// How a pipeline run should treat fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixtureMode {
    /// Talk to the live endpoint only.
    #[default]
    Off,
    /// Talk to the live endpoint and store every exchange.
    Record,
    /// Serve stored exchanges; never touch the network.
    Replay,
}

impl FromStr for FixtureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(FixtureMode::Off),
            "record" => Ok(FixtureMode::Record),
            "replay" => Ok(FixtureMode::Replay),
            other => Err(format!(
                "unknown fixture mode `{other}` (expected off, record, or replay)"
            )),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FixtureFile {
    endpoint: String,
    request: serde_json::Value,
    response: serde_json::Value,
}

fn fixture_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

/// Wraps a live transport and stores every successful exchange on disk.
pub struct FixtureRecorder<T> {
    inner: T,
    dir: PathBuf,
}

impl<T: Transport> FixtureRecorder<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Result<Self, TransportError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| TransportError::FixtureIo {
            path: dir.clone(),
            source,
        })?;
        Ok(Self { inner, dir })
    }
}

impl<T: Transport> Transport for FixtureRecorder<T> {
    fn post_json(
        &self,
        endpoint: &str,
        body: &serde_json::Value,
    ) -> Result<serde_json::Value, TransportError> {
        let response = self.inner.post_json(endpoint, body)?;
        let key = request_key(endpoint, body);
        let path = fixture_path(&self.dir, &key);
        let record = FixtureFile {
            endpoint: endpoint.to_string(),
            request: body.clone(),
            response: response.clone(),
        };
        let text = serde_json::to_string_pretty(&record).expect("fixture serializes");
        std::fs::write(&path, text)
            .map_err(|source| TransportError::FixtureIo { path, source })?;
        Ok(response)
    }
}

/// Serves recorded exchanges from disk; a request with no stored fixture is
/// an error rather than a silent network fallback.
pub struct FixtureReplayer {
    dir: PathBuf,
}

impl FixtureReplayer {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl Transport for FixtureReplayer {
    fn post_json(
        &self,
        endpoint: &str,
        body: &serde_json::Value,
    ) -> Result<serde_json::Value, TransportError> {
        let key = request_key(endpoint, body);
        let path = fixture_path(&self.dir, &key);
        let text = std::fs::read_to_string(&path).map_err(|_| TransportError::MissingFixture {
            key: key.clone(),
            endpoint: endpoint.to_string(),
        })?;
        let record: FixtureFile =
            serde_json::from_str(&text).map_err(|e| TransportError::Json(e.to_string()))?;
        Ok(record.response)
    }
}
