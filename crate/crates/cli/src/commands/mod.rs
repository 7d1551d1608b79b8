//! Command implementations.

pub mod ask;
pub mod ingest;
pub mod remote;
pub mod stores;

use ragforge::embedding::{
    Embedder, EmbedderSpec, EmbeddingError, ReferenceEmbedder, RemoteEmbedder,
};
use ragforge::generation::GenerationError;
use ragforge::ingest::IngestError;
use ragforge::remote_assistant::RemoteAssistantError;
use ragforge::retrieval::RetrievalError;
use ragforge::vector_store::StoreError;

use crate::config::{EmbedBackendChoice, Settings};
use crate::CliError;

/// Embedder selected by configuration.
pub fn build_embedder(settings: &Settings, dimension: usize) -> Box<dyn Embedder> {
    match settings.embed_backend {
        EmbedBackendChoice::Reference => Box::new(ReferenceEmbedder::new(dimension)),
        EmbedBackendChoice::Remote => {
            let spec = EmbedderSpec::remote(
                settings.embed_endpoint.clone().expect("validated"),
                settings.embed_model.clone().expect("validated"),
                dimension,
            );
            Box::new(RemoteEmbedder::new(spec))
        }
    }
}

// Stable error names for user-facing messages: the name and the message
// are printed, never a stack trace.

pub fn ingest_error_name(e: &IngestError) -> &'static str {
    match e {
        IngestError::NotFound(_) => "NotFound",
        IngestError::UnsupportedKind(_) => "UnsupportedKind",
        IngestError::EncodingError(_) => "EncodingError",
        IngestError::UnsupportedPdfFeature(_) => "UnsupportedPdfFeature",
        IngestError::MalformedPdf(_) => "MalformedPdf",
        IngestError::EmptyDirectory(_) => "EmptyDirectory",
        IngestError::Io(_) => "IoError",
    }
}

pub fn store_error_name(e: &StoreError) -> &'static str {
    match e {
        StoreError::EmptyName => "EmptyName",
        StoreError::ConfigMismatch { .. } => "ConfigMismatch",
        StoreError::DimensionMismatch { .. } => "DimensionMismatch",
        StoreError::EmbedderMismatch { .. } => "EmbedderMismatch",
        StoreError::NotFound(_) => "NotFound",
        StoreError::CorruptStore(_) => "CorruptStore",
        StoreError::Io(_) => "IoError",
    }
}

pub fn embedding_error_name(e: &EmbeddingError) -> &'static str {
    match e {
        EmbeddingError::HttpError { .. } => "HttpError",
        EmbeddingError::DimensionMismatch { .. } => "DimensionMismatch",
        EmbeddingError::Timeout => "Timeout",
        EmbeddingError::Unavailable(_) => "BackendUnavailable",
        EmbeddingError::InvalidResponse(_) => "InvalidResponse",
    }
}

pub fn retrieval_error_name(e: &RetrievalError) -> &'static str {
    match e {
        RetrievalError::EmbedderMismatch { .. } => "EmbedderMismatch",
        RetrievalError::BadTemplate(_) => "BadTemplate",
        RetrievalError::Store(inner) => store_error_name(inner),
        RetrievalError::Embedding(inner) => embedding_error_name(inner),
    }
}

pub fn generation_error_name(e: &GenerationError) -> &'static str {
    match e {
        GenerationError::HttpError { .. } => "HttpError",
        GenerationError::Timeout => "Timeout",
        GenerationError::BackendUnavailable(_) => "BackendUnavailable",
        GenerationError::MissingApiKey => "MissingApiKey",
        GenerationError::InvalidResponse(_) => "InvalidResponse",
        GenerationError::InvalidConfig(_) => "InvalidConfig",
        GenerationError::Retrieval(inner) => retrieval_error_name(inner),
    }
}

pub fn remote_error_name(e: &RemoteAssistantError) -> &'static str {
    match e {
        RemoteAssistantError::EmptyName => "EmptyName",
        RemoteAssistantError::DirNotFound(_) => "NotFound",
        RemoteAssistantError::EmptyDirectory(_) => "EmptyDirectory",
        RemoteAssistantError::NoPdfFiles(_) => "NoPdfFiles",
        RemoteAssistantError::HttpError { .. } => "HttpError",
        RemoteAssistantError::UploadFailed { .. } => "UploadFailed",
        RemoteAssistantError::RunFailed(_) => "RunFailed",
        RemoteAssistantError::Timeout => "Timeout",
        RemoteAssistantError::Unavailable(_) => "BackendUnavailable",
        RemoteAssistantError::InvalidResponse(_) => "InvalidResponse",
    }
}

pub fn operational(name: &str, e: impl std::fmt::Display) -> CliError {
    CliError::operational(format!("{name}: {e}"))
}
