//! HTTP client for a remote embeddings endpoint.
//!
//! Wire contract: `POST {endpoint}/v1/embeddings` with
//! `{"model": <name>, "input": [texts…]}`; the response carries
//! `{"data": [{"index": i, "embedding": [floats…]}…]}` and entries are
//! reassembled by `index`. Embedding calls are fail-fast: no retries, the
//! error is surfaced to the caller.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use crate::net::{excerpt, HttpClient, HttpFailure};

use super::{Embedder, EmbedderBackend, EmbedderSpec, EmbeddingError, EmbeddingVector};

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingRow>,
}

#[derive(Deserialize)]
struct EmbeddingRow {
    index: usize,
    embedding: Vec<f64>,
}

/// Embed `texts` through the remote endpoint named by `spec`, one vector
/// per input in input order.
///
/// Each returned vector must have length `spec.dimension`; anything else is
/// a [`EmbeddingError::DimensionMismatch`] — the index and the queries must
/// come from the same embedder, and a wrong-size vector means they do not.
/// Vectors are L2-normalized on receipt so downstream invariants hold
/// regardless of server conventions.
pub fn remote_embed(
    texts: &[String],
    spec: &EmbedderSpec,
) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
    assert_eq!(
        spec.backend,
        EmbedderBackend::RemoteHttp,
        "remote_embed requires a RemoteHttp spec"
    );
    let endpoint = spec
        .endpoint
        .as_deref()
        .expect("RemoteHttp spec carries an endpoint");
    let model = spec
        .model_name
        .as_deref()
        .expect("RemoteHttp spec carries a model name");
    assert!(!texts.is_empty(), "remote_embed requires at least one text");

    let client = HttpClient::new(Duration::from_secs(spec.timeout_s));
    let url = format!("{}/v1/embeddings", endpoint.trim_end_matches('/'));
    let body = json!({ "model": model, "input": texts });

    let (status, text) = client.post_json(&url, &[], &body).map_err(|f| match f {
        HttpFailure::Timeout => EmbeddingError::Timeout,
        HttpFailure::Unavailable(msg) => EmbeddingError::Unavailable(msg),
        HttpFailure::Other(msg) => EmbeddingError::InvalidResponse(msg),
    })?;
    if status != 200 {
        return Err(EmbeddingError::HttpError {
            status,
            body: excerpt(&text, 200),
        });
    }

    let parsed: EmbeddingsResponse = serde_json::from_str(&text)
        .map_err(|e| EmbeddingError::InvalidResponse(format!("bad embeddings JSON: {e}")))?;
    if parsed.data.len() != texts.len() {
        return Err(EmbeddingError::InvalidResponse(format!(
            "expected {} embeddings, got {}",
            texts.len(),
            parsed.data.len()
        )));
    }

    let mut slots: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
    for row in parsed.data {
        if row.embedding.len() != spec.dimension {
            return Err(EmbeddingError::DimensionMismatch {
                expected: spec.dimension,
                got: row.embedding.len(),
            });
        }
        if row.embedding.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::InvalidResponse(
                "embedding contains non-finite values".into(),
            ));
        }
        let slot = slots.get_mut(row.index).ok_or_else(|| {
            EmbeddingError::InvalidResponse(format!("embedding index {} out of range", row.index))
        })?;
        if slot.replace(row.embedding).is_some() {
            return Err(EmbeddingError::InvalidResponse(format!(
                "duplicate embedding index {}",
                row.index
            )));
        }
    }

    slots
        .into_iter()
        .map(|slot| {
            let mut values =
                slot.ok_or_else(|| EmbeddingError::InvalidResponse("missing index".into()))?;
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in values.iter_mut() {
                    *v /= norm;
                }
            }
            Ok(EmbeddingVector {
                values,
                embedder_id: model.to_string(),
            })
        })
        .collect()
}

/// [`Embedder`] backed by the remote endpoint; batches of one per call.
#[derive(Debug, Clone)]
pub struct RemoteEmbedder {
    spec: EmbedderSpec,
}

impl RemoteEmbedder {
    pub fn new(spec: EmbedderSpec) -> Self {
        assert_eq!(spec.backend, EmbedderBackend::RemoteHttp);
        Self { spec }
    }
}

impl Embedder for RemoteEmbedder {
    fn embedder_id(&self) -> String {
        self.spec.model_name.clone().unwrap_or_default()
    }

    fn dimension(&self) -> usize {
        self.spec.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        let mut vectors = remote_embed(&[text.to_string()], &self.spec)?;
        Ok(vectors.remove(0))
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        remote_embed(texts, &self.spec)
    }
}
