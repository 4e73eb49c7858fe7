//! Batch embedding orchestration: modality checks, image budget resizing,
//! bounded worker concurrency, retry with exponential backoff, and a
//! failure-rate gate.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostics;
use crate::embed::pixels::resize_image_to_budget;
use crate::embed::{
    EmbedInput, Embedding, EmbeddingProvider, Precision, ProviderDescriptor, ProviderError,
    UnitEmbedding,
};
use crate::repr::EmbeddingUnit;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("unit {doc_id}/{unit_id} carries {carries}, but provider `{provider}` accepts {accepts}")]
    ModalityMismatch {
        doc_id: String,
        unit_id: String,
        provider: String,
        carries: String,
        accepts: String,
    },
    #[error("{failed} of {total} units failed embedding, above the {threshold} failure-rate threshold")]
    TooManyFailures {
        failed: usize,
        total: usize,
        threshold: f64,
    },
}

/// Retry schedule for transient failures: the first attempt plus up to
/// `max_retries` retries, sleeping `base_delay`, 2×, 4×, ... between them.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    pub(crate) fn delay_before_retry(&self, retry: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(retry.saturating_sub(1))
    }
}

#[derive(Debug, Clone)]
pub struct EmbedOptions {
    pub batch_size: usize,
    pub workers: usize,
    pub retry: RetryPolicy,
    /// Fraction of units allowed to fail before the whole run is an error.
    /// The gate trips only when the observed rate strictly exceeds this.
    pub failure_threshold: f64,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            batch_size: 16,
            workers: 4,
            retry: RetryPolicy::default(),
            failure_threshold: 0.01,
        }
    }
}

/// One unit that could not be embedded, with the reason it failed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitFailure {
    pub doc_id: String,
    pub unit_id: String,
    pub reason: String,
}

/// The outcome of embedding a unit set: vectors for the units that
/// succeeded, failures for those that did not, and norm diagnostics.
#[derive(Debug)]
pub struct EmbedRun {
    pub descriptor: ProviderDescriptor,
    pub embeddings: Vec<UnitEmbedding>,
    pub failures: Vec<UnitFailure>,
    pub diagnostics: Diagnostics,
}

fn check_modality(
    units: &[EmbeddingUnit],
    descriptor: &ProviderDescriptor,
) -> Result<(), EmbedError> {
    let accepts = match (
        descriptor.modality.accepts_text(),
        descriptor.modality.accepts_images(),
    ) {
        (true, true) => "text and images",
        (true, false) => "text only",
        (false, true) => "images only",
        (false, false) => "nothing",
    };
    for unit in units {
        let has_text = unit.text.as_deref().is_some_and(|t| !t.is_empty());
        let has_images = !unit.images.is_empty();
        let carries = if has_text && !descriptor.modality.accepts_text() {
            Some("text")
        } else if has_images && !descriptor.modality.accepts_images() {
            Some("images")
        } else {
            None
        };
        if let Some(carries) = carries {
            return Err(EmbedError::ModalityMismatch {
                doc_id: unit.doc_id.clone(),
                unit_id: unit.unit_id.clone(),
                provider: descriptor.name.clone(),
                carries: carries.into(),
                accepts: accepts.into(),
            });
        }
    }
    Ok(())
}

fn call_with_retry(
    provider: &dyn EmbeddingProvider,
    inputs: &[EmbedInput],
    policy: &RetryPolicy,
) -> Result<Vec<Embedding>, ProviderError> {
    let mut retry = 0;
    loop {
        match provider.embed_batch(inputs) {
            Ok(out) => return Ok(out),
            Err(err) => {
                let retryable =
                    matches!(&err, ProviderError::Transport(t) if t.is_retryable());
                if !retryable || retry >= policy.max_retries {
                    return Err(err);
                }
                retry += 1;
                std::thread::sleep(policy.delay_before_retry(retry));
            }
        }
    }
}

fn check_norms(run: &[UnitEmbedding], descriptor: &ProviderDescriptor, diag: &mut Diagnostics) {
    if !descriptor.normalizes {
        return;
    }
    for embedding in run {
        for (r, row) in embedding.vectors.iter_rows().enumerate() {
            let norm = row.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                diag.note(format!(
                    "unit {}/{} row {r}: zero-norm vector (empty content)",
                    embedding.doc_id, embedding.unit_id
                ));
            } else if (norm - 1.0).abs() > 1e-3 {
                diag.note(format!(
                    "unit {}/{} row {r}: norm {norm:.6} deviates from 1.0",
                    embedding.doc_id, embedding.unit_id
                ));
            }
        }
    }
}

/// Embed every unit with the given provider. Modality mismatches fail
/// upfront; transient transport errors are retried; units that still fail
/// are recorded individually, and the run errors only when the failure rate
/// strictly exceeds the configured threshold.
pub fn embed_units(
    units: &[EmbeddingUnit],
    provider: &dyn EmbeddingProvider,
    options: &EmbedOptions,
) -> Result<EmbedRun, EmbedError> {
    let descriptor = provider.descriptor().clone();
    check_modality(units, &descriptor)?;

    let mut diagnostics = Diagnostics::default();
    let mut indexed_failures: Vec<(usize, UnitFailure)> = Vec::new();

    // Prepare inputs, resizing images to the pixel budget where one is set.
    // A unit whose image cannot be decoded fails here rather than killing
    // the run.
    let mut prepared: Vec<(usize, EmbedInput)> = Vec::new();
    for (i, unit) in units.iter().enumerate() {
        let mut input = EmbedInput::from(unit);
        if let Some(budget) = descriptor.max_pixels {
            let mut resized = Vec::with_capacity(input.images.len());
            let mut bad = None;
            for blob in &input.images {
                match resize_image_to_budget(blob, budget) {
                    Ok(out) => resized.push(out),
                    Err(err) => {
                        bad = Some(err);
                        break;
                    }
                }
            }
            if let Some(err) = bad {
                indexed_failures.push((
                    i,
                    UnitFailure {
                        doc_id: unit.doc_id.clone(),
                        unit_id: unit.unit_id.clone(),
                        reason: format!("image preprocessing failed: {err}"),
                    },
                ));
                continue;
            }
            input.images = resized;
        }
        prepared.push((i, input));
    }

    type BatchSlot = Mutex<Option<Result<Vec<Embedding>, String>>>;
    let batch_size = options.batch_size.max(1);
    let batches: Vec<&[(usize, EmbedInput)]> = prepared.chunks(batch_size).collect();
    let results: Vec<BatchSlot> = batches.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = options.workers.max(1).min(batches.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let b = next.fetch_add(1, Ordering::Relaxed);
                if b >= batches.len() {
                    break;
                }
                let inputs: Vec<EmbedInput> =
                    batches[b].iter().map(|(_, input)| input.clone()).collect();
                let outcome = call_with_retry(provider, &inputs, &options.retry)
                    .map_err(|e| e.to_string());
                *results[b].lock().unwrap() = Some(outcome);
            });
        }
    });

    let mut embeddings = Vec::with_capacity(prepared.len());
    for (batch, slot) in batches.iter().zip(&results) {
        let outcome = slot.lock().unwrap().take().expect("batch processed");
        match outcome {
            Ok(vectors) => {
                for ((i, _), vectors) in batch.iter().zip(vectors) {
                    let unit = &units[*i];
                    embeddings.push(UnitEmbedding {
                        doc_id: unit.doc_id.clone(),
                        unit_id: unit.unit_id.clone(),
                        vectors,
                        precision: Precision::F32,
                    });
                }
            }
            Err(reason) => {
                for (i, _) in batch.iter() {
                    let unit = &units[*i];
                    indexed_failures.push((
                        *i,
                        UnitFailure {
                            doc_id: unit.doc_id.clone(),
                            unit_id: unit.unit_id.clone(),
                            reason: reason.clone(),
                        },
                    ));
                }
            }
        }
    }

    indexed_failures.sort_by_key(|(i, _)| *i);
    let failures: Vec<UnitFailure> = indexed_failures.into_iter().map(|(_, f)| f).collect();

    if !units.is_empty() {
        let rate = failures.len() as f64 / units.len() as f64;
        if rate > options.failure_threshold {
            return Err(EmbedError::TooManyFailures {
                failed: failures.len(),
                total: units.len(),
                threshold: options.failure_threshold,
            });
        }
    }

    check_norms(&embeddings, &descriptor, &mut diagnostics);

    Ok(EmbedRun {
        descriptor,
        embeddings,
        failures,
        diagnostics,
    })
}
