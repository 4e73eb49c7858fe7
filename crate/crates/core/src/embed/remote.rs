//! Remote embedding provider speaking a small JSON protocol.
//!
//! Request: `{"model": .., "inputs": [{"text": ..?, "images": [b64, ..]?}, ..], "mode": "single"|"multi"}`.
//! Response: `{"vectors": .., "dimension": .., "normalized": ..}` where
//! `vectors` is one row per input in single mode and a row matrix per input
//! in multi mode.

use std::sync::Arc;

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::embed::transport::Transport;
use crate::embed::{
    EmbedInput, Embedding, EmbeddingProvider, ProviderDescriptor, ProviderError, VectorMode,
};

#[derive(Debug, Serialize)]
struct WireInput {
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    images: Vec<String>,
}

#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    inputs: Vec<WireInput>,
    mode: &'a str,
}

#[derive(Debug, Deserialize)]
struct WireResponseSingle {
    vectors: Vec<Vec<f32>>,
    dimension: usize,
    #[allow(dead_code)]
    normalized: bool,
}

#[derive(Debug, Deserialize)]
struct WireResponseMulti {
    vectors: Vec<Vec<Vec<f32>>>,
    dimension: usize,
    #[allow(dead_code)]
    normalized: bool,
}

/// An embedding provider backed by a JSON endpoint. The transport is
/// injected, so the same provider runs live, recording, or replaying.
pub struct RemoteProvider {
    descriptor: ProviderDescriptor,
    endpoint: String,
    transport: Arc<dyn Transport>,
}

impl RemoteProvider {
    pub fn new(
        descriptor: ProviderDescriptor,
        endpoint: impl Into<String>,
        transport: Arc<dyn Transport>,
    ) -> Self {
        Self {
            descriptor,
            endpoint: endpoint.into(),
            transport,
        }
    }

    fn wire_inputs(inputs: &[EmbedInput]) -> Vec<WireInput> {
        inputs
            .iter()
            .map(|input| WireInput {
                text: input.text.clone(),
                images: input
                    .images
                    .iter()
                    .map(|blob| base64::engine::general_purpose::STANDARD.encode(&blob.bytes))
                    .collect(),
            })
            .collect()
    }

    fn check_dimension(&self, reported: usize) -> Result<(), ProviderError> {
        if reported != self.descriptor.dimension {
            return Err(ProviderError::DimensionMismatch {
                expected: self.descriptor.dimension,
                got: reported,
            });
        }
        Ok(())
    }

    fn rows_to_embedding(&self, rows: Vec<Vec<f32>>) -> Result<Embedding, ProviderError> {
        for row in &rows {
            if row.len() != self.descriptor.dimension {
                return Err(ProviderError::DimensionMismatch {
                    expected: self.descriptor.dimension,
                    got: row.len(),
                });
            }
        }
        Embedding::from_rows(rows, self.descriptor.dimension)
            .map_err(|e| ProviderError::MalformedResponse(e.to_string()))
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn embed_batch(&self, inputs: &[EmbedInput]) -> Result<Vec<Embedding>, ProviderError> {
        let mode = match self.descriptor.vector_mode {
            VectorMode::Single => "single",
            VectorMode::Multi => "multi",
        };
        let request = WireRequest {
            model: &self.descriptor.name,
            inputs: Self::wire_inputs(inputs),
            mode,
        };
        let body = serde_json::to_value(&request)
            .map_err(|e| ProviderError::MalformedResponse(e.to_string()))?;
        let raw = self.transport.post_json(&self.endpoint, &body)?;

        match self.descriptor.vector_mode {
            VectorMode::Single => {
                let parsed: WireResponseSingle = serde_json::from_value(raw)
                    .map_err(|e| ProviderError::MalformedResponse(e.to_string()))?;
                self.check_dimension(parsed.dimension)?;
                if parsed.vectors.len() != inputs.len() {
                    return Err(ProviderError::CountMismatch {
                        expected: inputs.len(),
                        got: parsed.vectors.len(),
                    });
                }
                parsed
                    .vectors
                    .into_iter()
                    .map(|row| self.rows_to_embedding(vec![row]))
                    .collect()
            }
            VectorMode::Multi => {
                let parsed: WireResponseMulti = serde_json::from_value(raw)
                    .map_err(|e| ProviderError::MalformedResponse(e.to_string()))?;
                self.check_dimension(parsed.dimension)?;
                if parsed.vectors.len() != inputs.len() {
                    return Err(ProviderError::CountMismatch {
                        expected: inputs.len(),
                        got: parsed.vectors.len(),
                    });
                }
                parsed
                    .vectors
                    .into_iter()
                    .map(|rows| self.rows_to_embedding(rows))
                    .collect()
            }
        }
    }
}
