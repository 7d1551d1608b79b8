//! Named, persistent stores of (chunk, embedding) records with exact top-k
//! cosine search.
//!
//! A store lives under `<root>/<name>/` as two files:
//!
//! - `manifest.json` — name, store_id, dimension, embedder_id,
//!   record_count, created_at.
//! - `records.jsonl` — one record per line:
//!   `{"seq", "chunk_id", "doc_id", "source_file", "ordinal",
//!   "token_start", "token_end", "text", "embedding"}`.
//!
//! The format is line-oriented text so stores diff cleanly and can be
//! re-read by other tooling. Floats round-trip bit-exactly (shortest
//! representation that reparses to the same 64-bit value). Search is an
//! exact flat scan — correct and fully testable at desk scale; nothing in
//! the interface precludes swapping in an approximate index later.
//!
//! Stores are single-writer, multi-reader: concurrent searches are fine,
//! mutation requires exclusive access, and cross-process locking is out of
//! scope (the CLI is the only writer).

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunker::Chunk;
use crate::embedding::{cosine, EmbeddingVector};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("'store name' is not set. Please provide a valid vector store name.")]
    EmptyName,
    #[error(
        "store '{name}' exists with dimension {have_dim} and embedder '{have_embedder}', \
         requested dimension {want_dim} and embedder '{want_embedder}'"
    )]
    ConfigMismatch {
        name: String,
        have_dim: usize,
        want_dim: usize,
        have_embedder: String,
        want_embedder: String,
    },
    #[error("vector has dimension {got}, store expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector comes from embedder '{got}', store expects '{expected}'")]
    EmbedderMismatch { expected: String, got: String },
    #[error("store '{0}' not found")]
    NotFound(String),
    #[error("corrupt store: {0}")]
    CorruptStore(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Identity and shape of a store; immutable after creation except for
/// `record_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreManifest {
    pub name: String,
    pub store_id: String,
    pub dimension: usize,
    pub embedder_id: String,
    pub record_count: usize,
    pub created_at: String,
}

/// One indexed chunk with its embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct StoreRecord {
    pub chunk: Chunk,
    pub source_file: String,
    pub embedding: EmbeddingVector,
    pub insert_seq: u64,
}

/// A scored record from a search. Result lists are sorted by score
/// descending with ties broken by smaller `insert_seq`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit<'a> {
    pub record: &'a StoreRecord,
    pub score: f64,
}

/// On-disk line shape for `records.jsonl`.
#[derive(Serialize, Deserialize)]
struct RecordLine {
    seq: u64,
    chunk_id: String,
    doc_id: String,
    source_file: String,
    ordinal: usize,
    token_start: usize,
    token_end: usize,
    text: String,
    embedding: Vec<f64>,
}

impl RecordLine {
    fn from_record(r: &StoreRecord) -> Self {
        Self {
            seq: r.insert_seq,
            chunk_id: r.chunk.chunk_id.clone(),
            doc_id: r.chunk.doc_id.clone(),
            source_file: r.source_file.clone(),
            ordinal: r.chunk.ordinal,
            token_start: r.chunk.token_start,
            token_end: r.chunk.token_end,
            text: r.chunk.text.clone(),
            embedding: r.embedding.values.clone(),
        }
    }

    fn into_record(self, embedder_id: &str) -> StoreRecord {
        StoreRecord {
            chunk: Chunk {
                chunk_id: self.chunk_id,
                doc_id: self.doc_id,
                ordinal: self.ordinal,
                text: self.text,
                token_start: self.token_start,
                token_end: self.token_end,
            },
            source_file: self.source_file,
            embedding: EmbeddingVector {
                values: self.embedding,
                embedder_id: embedder_id.to_string(),
            },
            insert_seq: self.seq,
        }
    }
}

#[derive(Debug)]
pub struct VectorStore {
    dir: PathBuf,
    manifest: StoreManifest,
    records: Vec<StoreRecord>,
}

/// Name-keyed idempotent store acquisition: reuse on match, create
/// otherwise. Reusing requires the same dimension and embedder identity.
pub fn get_or_create_store(
    root: &Path,
    name: &str,
    dimension: usize,
    embedder_id: &str,
) -> Result<VectorStore, StoreError> {
    if name.is_empty() {
        return Err(StoreError::EmptyName);
    }
    let dir = root.join(name);
    if dir.join("manifest.json").exists() {
        let store = load_store(root, name)?;
        if store.manifest.dimension != dimension || store.manifest.embedder_id != embedder_id {
            return Err(StoreError::ConfigMismatch {
                name: name.to_string(),
                have_dim: store.manifest.dimension,
                want_dim: dimension,
                have_embedder: store.manifest.embedder_id.clone(),
                want_embedder: embedder_id.to_string(),
            });
        }
        return Ok(store);
    }

    let now = Utc::now();
    let manifest = StoreManifest {
        name: name.to_string(),
        // Timestamp suffix keeps ids unique across drop/recreate cycles.
        store_id: format!("{name}-{}", now.format("%Y%m%dT%H%M%SZ")),
        dimension,
        embedder_id: embedder_id.to_string(),
        record_count: 0,
        created_at: now.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
    };
    let store = VectorStore {
        dir,
        manifest,
        records: Vec::new(),
    };
    store.persist()?;
    Ok(store)
}

/// Load an existing store, verifying manifest/records consistency.
pub fn load_store(root: &Path, name: &str) -> Result<VectorStore, StoreError> {
    let dir = root.join(name);
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.exists() {
        return Err(StoreError::NotFound(name.to_string()));
    }
    let manifest: StoreManifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)
        .map_err(|e| StoreError::CorruptStore(format!("manifest.json: {e}")))?;

    let records_path = dir.join("records.jsonl");
    let mut records = Vec::new();
    if records_path.exists() {
        let reader = BufReader::new(fs::File::open(&records_path)?);
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: RecordLine = serde_json::from_str(&line).map_err(|e| {
                StoreError::CorruptStore(format!("records.jsonl line {}: {e}", lineno + 1))
            })?;
            if parsed.embedding.len() != manifest.dimension {
                return Err(StoreError::CorruptStore(format!(
                    "records.jsonl line {}: embedding length {} != dimension {}",
                    lineno + 1,
                    parsed.embedding.len(),
                    manifest.dimension
                )));
            }
            records.push(parsed.into_record(&manifest.embedder_id));
        }
    }
    if records.len() != manifest.record_count {
        return Err(StoreError::CorruptStore(format!(
            "manifest says {} records, found {}",
            manifest.record_count,
            records.len()
        )));
    }

    Ok(VectorStore {
        dir,
        manifest,
        records,
    })
}

/// Manifests of every store under `root`, sorted by name. A missing root
/// is an empty listing.
pub fn list_stores(root: &Path) -> Result<Vec<StoreManifest>, StoreError> {
    let mut manifests = Vec::new();
    if !root.exists() {
        return Ok(manifests);
    }
    for entry in fs::read_dir(root)? {
        let entry = entry?;
        let manifest_path = entry.path().join("manifest.json");
        if manifest_path.is_file() {
            let manifest: StoreManifest =
                serde_json::from_str(&fs::read_to_string(&manifest_path)?).map_err(|e| {
                    StoreError::CorruptStore(format!("{}: {e}", manifest_path.display()))
                })?;
            manifests.push(manifest);
        }
    }
    manifests.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(manifests)
}

pub fn delete_store(root: &Path, name: &str) -> Result<(), StoreError> {
    let dir = root.join(name);
    if !dir.join("manifest.json").exists() {
        return Err(StoreError::NotFound(name.to_string()));
    }
    fs::remove_dir_all(dir)?;
    Ok(())
}

impl VectorStore {
    pub fn manifest(&self) -> &StoreManifest {
        &self.manifest
    }

    pub fn records(&self) -> &[StoreRecord] {
        &self.records
    }

    /// Whether any record came from this document (byte-identical source).
    pub fn contains_doc(&self, doc_id: &str) -> bool {
        self.records.iter().any(|r| r.chunk.doc_id == doc_id)
    }

    /// Append records and persist; all-or-nothing. Every embedding must
    /// match the store's dimension and embedder identity, otherwise the
    /// whole batch is rejected and the store is unchanged.
    pub fn add_records(
        &mut self,
        items: Vec<(Chunk, String, EmbeddingVector)>,
    ) -> Result<Vec<u64>, StoreError> {
        for (_, _, embedding) in &items {
            if embedding.dimension() != self.manifest.dimension {
                return Err(StoreError::DimensionMismatch {
                    expected: self.manifest.dimension,
                    got: embedding.dimension(),
                });
            }
            if embedding.embedder_id != self.manifest.embedder_id {
                return Err(StoreError::EmbedderMismatch {
                    expected: self.manifest.embedder_id.clone(),
                    got: embedding.embedder_id.clone(),
                });
            }
        }

        let first_seq = self.records.last().map(|r| r.insert_seq + 1).unwrap_or(0);
        let mut seqs = Vec::with_capacity(items.len());
        for (offset, (chunk, source_file, embedding)) in items.into_iter().enumerate() {
            let seq = first_seq + offset as u64;
            seqs.push(seq);
            self.records.push(StoreRecord {
                chunk,
                source_file,
                embedding,
                insert_seq: seq,
            });
        }
        self.manifest.record_count = self.records.len();
        self.persist()?;
        Ok(seqs)
    }

    /// Exact top-k by cosine similarity: scans every record, keeps scores
    /// `>= min_score`, sorts by score descending with `insert_seq` as the
    /// tie-break, returns at most `k` hits.
    pub fn search(
        &self,
        query: &EmbeddingVector,
        k: usize,
        min_score: f64,
    ) -> Result<Vec<SearchHit<'_>>, StoreError> {
        if query.dimension() != self.manifest.dimension {
            return Err(StoreError::DimensionMismatch {
                expected: self.manifest.dimension,
                got: query.dimension(),
            });
        }
        let mut hits: Vec<SearchHit<'_>> = self
            .records
            .iter()
            .map(|record| SearchHit {
                record,
                score: cosine(&query.values, &record.embedding.values),
            })
            .filter(|hit| hit.score >= min_score)
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("scores are finite")
                .then_with(|| a.record.insert_seq.cmp(&b.record.insert_seq))
        });
        hits.truncate(k);
        Ok(hits)
    }

    /// Write manifest and records to disk. Records go first so a manifest
    /// never claims more records than the file holds.
    pub fn persist(&self) -> Result<(), StoreError> {
        fs::create_dir_all(&self.dir)?;
        let mut records_out = Vec::new();
        for record in &self.records {
            serde_json::to_writer(&mut records_out, &RecordLine::from_record(record))
                .expect("record serialization is infallible");
            records_out.push(b'\n');
        }
        fs::write(self.dir.join("records.jsonl"), records_out)?;

        let mut manifest_file = fs::File::create(self.dir.join("manifest.json"))?;
        serde_json::to_writer_pretty(&mut manifest_file, &self.manifest)
            .expect("manifest serialization is infallible");
        manifest_file.write_all(b"\n")?;
        Ok(())
    }
}
