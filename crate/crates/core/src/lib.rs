//! ragforge — a PDF-grounded retrieval-augmented generation engine.
//!
//! The library covers the full pipeline in two operating modes:
//!
//! - **Local mode**: [`ingest`] loads and cleans `.txt`/`.pdf` sources,
//!   [`chunker`] splits them into retrieval-sized chunks, [`embedding`]
//!   turns chunks into vectors, [`vector_store`] persists them and answers
//!   exact top-k cosine queries, [`retrieval`] assembles context-infused
//!   prompts with citations, and [`generation`] produces answers through
//!   pluggable chat backends.
//! - **Remote mode**: [`remote_assistant`] is a thin client for a managed
//!   assistant/file-search service: get-or-create vector store, PDF upload,
//!   assistant setup, thread creation, run polling and citation extraction.
//!
//! All offline behavior is deterministic; the reference embedder and the
//! offline echo backend let the whole pipeline run and be tested without a
//! model or network access.

pub mod chunker;
pub mod embedding;
pub mod generation;
pub mod ingest;
pub mod pdf;
pub mod remote_assistant;
pub mod retrieval;
pub mod vector_store;

mod net;

pub use chunker::{Chunk, ChunkConfig, ChunkMode};
pub use embedding::{Embedder, EmbedderSpec, EmbeddingVector, ReferenceEmbedder};
pub use generation::{
    AnnotatedAnswer, ConversationSession, GenerationBackend, GenerationConfig, Role,
};
pub use ingest::{CleanConfig, DocumentMetadata, ExtractedDocument, SourceDocument, SourceKind};
pub use remote_assistant::{
    AssistantProfile, PollConfig, RemoteAssistantClient, RemoteIds, RunStatus,
};
pub use retrieval::{PromptBundle, PromptTemplate, RetrievalResult};
pub use vector_store::{SearchHit, StoreManifest, StoreRecord, VectorStore};
