//! Text-to-vector embedding.
//!
//! Two backends: a fully deterministic signed feature-hashing embedder
//! ("hashbow") that makes the whole pipeline testable offline, and an HTTP
//! client for a remote embeddings endpoint. Retrieval quality degrades
//! silently when index and query embeddings come from different models, so
//! every vector carries the identity of the embedder that produced it and
//! the store refuses mixed insertions.

mod remote;

pub use remote::{remote_embed, RemoteEmbedder};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding endpoint returned HTTP {status}: {body}")]
    HttpError { status: u16, body: String },
    #[error("embedding response vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding request timed out")]
    Timeout,
    #[error("embedding endpoint unreachable: {0}")]
    Unavailable(String),
    #[error("invalid embedding response: {0}")]
    InvalidResponse(String),
}

/// A fixed-dimension vector plus the identity of the embedder that made it.
///
/// Non-zero vectors are unit length (L2); the empty-text case is the
/// all-zeros vector, and cosine against a zero vector is defined as 0
/// everywhere downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub embedder_id: String,
}

impl EmbeddingVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Cosine similarity, defined as 0 when either vector has zero norm.
///
/// The result is clamped to [-1, 1] so accumulated rounding never leaks
/// out-of-range scores.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedderBackend {
    ReferenceHash,
    RemoteHttp,
}

/// Which embedder to run and how.
#[derive(Debug, Clone)]
pub struct EmbedderSpec {
    pub backend: EmbedderBackend,
    pub dimension: usize,
    /// RemoteHttp only.
    pub endpoint: Option<String>,
    /// RemoteHttp only.
    pub model_name: Option<String>,
    pub timeout_s: u64,
}

impl EmbedderSpec {
    pub fn reference(dimension: usize) -> Self {
        Self {
            backend: EmbedderBackend::ReferenceHash,
            dimension,
            endpoint: None,
            model_name: None,
            timeout_s: 30,
        }
    }

    pub fn remote(
        endpoint: impl Into<String>,
        model_name: impl Into<String>,
        dimension: usize,
    ) -> Self {
        Self {
            backend: EmbedderBackend::RemoteHttp,
            dimension,
            endpoint: Some(endpoint.into()),
            model_name: Some(model_name.into()),
            timeout_s: 30,
        }
    }
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        Self::reference(256)
    }
}

/// Anything that can embed text with a stable identity.
pub trait Embedder {
    /// Name + dimension identity, e.g. `"hashbow-256"` or a model name.
    fn embedder_id(&self) -> String;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError>;

    /// Batch embedding; the default maps [`Embedder::embed`] over the slice.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

/// Deterministic signed feature-hashing ("hashbow") embedder.
///
/// Tokens are the case-folded whitespace-delimited runs of the input. Each
/// token is hashed with 64-bit FNV-1a; the hash picks a bucket (`h mod d`)
/// and a sign (+1 when the most significant bit is 0), one increment per
/// occurrence. The accumulator is then L2-normalized. Text with no tokens
/// maps to the all-zeros vector.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceEmbedder {
    dimension: usize,
}

impl ReferenceEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 1, "embedding dimension must be >= 1");
        Self { dimension }
    }
}

impl Embedder for ReferenceEmbedder {
    fn embedder_id(&self) -> String {
        format!("hashbow-{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbeddingError> {
        Ok(reference_embed(text, self.dimension))
    }
}

const FNV_OFFSET: u64 = 14695981039346656037;
const FNV_PRIME: u64 = 1099511628211;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Feature-hashing bag-of-words embedding with unit L2 norm.
pub fn reference_embed(text: &str, dimension: usize) -> EmbeddingVector {
    assert!(dimension >= 1, "embedding dimension must be >= 1");
    let mut acc = vec![0.0f64; dimension];
    // Case-fold here even when the cleaning stage preserved case: retrieval
    // is case-insensitive while displayed text keeps its original casing.
    for token in text.to_lowercase().split_whitespace() {
        let h = fnv1a64(token.as_bytes());
        let bucket = (h % dimension as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        acc[bucket] += sign;
    }
    let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in acc.iter_mut() {
            *v /= norm;
        }
    }
    EmbeddingVector {
        values: acc,
        embedder_id: format!("hashbow-{dimension}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_is_deterministic_and_order_free() {
        let a = reference_embed("alpha beta", 32);
        let b = reference_embed("beta alpha", 32);
        assert_eq!(a.values, b.values);
        assert_eq!(a, reference_embed("alpha beta", 32));
    }

    #[test]
    fn empty_text_is_zero_vector() {
        let v = reference_embed("", 16);
        assert!(v.is_zero());
        assert_eq!(v.dimension(), 16);
        assert_eq!(cosine(&v.values, &v.values), 0.0);
    }

    #[test]
    fn nonzero_vectors_are_unit_norm() {
        for text in ["x", "a b c", "the quick brown fox", "Ünïcode tökens"] {
            let v = reference_embed(text, 64);
            assert!((v.norm() - 1.0).abs() < 1e-9, "norm for {text:?}");
        }
    }

    #[test]
    fn self_cosine_is_one() {
        let v = reference_embed("x", 8);
        assert!((cosine(&v.values, &v.values) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn case_folding_inside_embedder() {
        assert_eq!(
            reference_embed("Paris IS great", 32).values,
            reference_embed("paris is great", 32).values
        );
    }

    #[test]
    fn duplicating_token_multiset_preserves_cosine() {
        let base = "retrieval augmented generation grounds answers";
        let doubled = format!("{base} {base}");
        let a = reference_embed(base, 64);
        let b = reference_embed(&doubled, 64);
        assert!((cosine(&a.values, &b.values) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn embedder_id_carries_dimension() {
        assert_eq!(ReferenceEmbedder::new(256).embedder_id(), "hashbow-256");
        assert_eq!(reference_embed("x", 8).embedder_id, "hashbow-8");
    }

    #[test]
    fn fnv1a_reference_values() {
        // Published FNV-1a 64-bit test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn cosine_clamps_rounding() {
        let v = reference_embed("a b c d e f g", 16);
        let c = cosine(&v.values, &v.values);
        assert!((-1.0..=1.0).contains(&c));
    }
}
