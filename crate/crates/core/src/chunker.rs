//! Splitting cleaned text into retrieval-sized chunks.
//!
//! Two schemes are provided: fixed-window token chunking with overlap
//! (the managed file-search default of 800-token chunks with a 400-token
//! overlap) and semantic chunking at blank-line paragraph boundaries with
//! greedy merging.
//!
//! A "token" here is a maximal whitespace-delimited run. That proxy is
//! reproducible across platforms and keeps the 800/400 arithmetic exact
//! without tying the pipeline to any model-specific tokenizer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChunkError {
    #[error(
        "invalid chunk config: overlap_tokens ({overlap}) must be smaller than \
         max_chunk_tokens ({max})"
    )]
    InvalidConfig { max: usize, overlap: usize },
}

/// A contiguous token span of one document.
///
/// `token_start`/`token_end` are offsets into the parent document's token
/// sequence (`token_end` exclusive). `text` is the covered tokens re-joined
/// with single spaces, so text and offsets stay mutually consistent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    /// `"<doc_id>:<ordinal>"`.
    pub chunk_id: String,
    pub doc_id: String,
    /// 0-based, consecutive within a document.
    pub ordinal: usize,
    pub text: String,
    pub token_start: usize,
    pub token_end: usize,
}

impl Chunk {
    pub fn token_count(&self) -> usize {
        self.token_end - self.token_start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkConfig {
    pub max_chunk_tokens: usize,
    pub overlap_tokens: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        // The managed file-search defaults: 800-token chunks, 400-token overlap.
        Self {
            max_chunk_tokens: 800,
            overlap_tokens: 400,
        }
    }
}

impl ChunkConfig {
    pub fn new(max_chunk_tokens: usize, overlap_tokens: usize) -> Result<Self, ChunkError> {
        let cfg = Self {
            max_chunk_tokens,
            overlap_tokens,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Stride must be positive: overlap < max.
    pub fn validate(&self) -> Result<(), ChunkError> {
        if self.overlap_tokens >= self.max_chunk_tokens || self.max_chunk_tokens == 0 {
            return Err(ChunkError::InvalidConfig {
                max: self.max_chunk_tokens,
                overlap: self.overlap_tokens,
            });
        }
        Ok(())
    }

    fn stride(&self) -> usize {
        self.max_chunk_tokens - self.overlap_tokens
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChunkMode {
    #[default]
    Fixed,
    Semantic,
}

impl std::str::FromStr for ChunkMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(ChunkMode::Fixed),
            "semantic" => Ok(ChunkMode::Semantic),
            other => Err(format!(
                "unknown chunk mode '{other}' (expected fixed|semantic)"
            )),
        }
    }
}

/// Number of maximal non-whitespace runs in `text`.
pub fn count_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Chunk with the mode selected by `mode`.
pub fn chunk_text(
    doc_id: &str,
    text: &str,
    cfg: &ChunkConfig,
    mode: ChunkMode,
) -> Result<Vec<Chunk>, ChunkError> {
    match mode {
        ChunkMode::Fixed => chunk_fixed(doc_id, text, cfg),
        ChunkMode::Semantic => chunk_semantic(doc_id, text, cfg),
    }
}

/// Sliding-window chunking over the token sequence.
///
/// With stride `s = max_chunk_tokens - overlap_tokens`, chunk `i` covers
/// tokens `[i*s, min(i*s + max_chunk_tokens, N))`. A trailing chunk whose
/// span is fully contained in the previous chunk's span is suppressed, so
/// no chunk duplicates content another chunk already covers in full.
pub fn chunk_fixed(doc_id: &str, text: &str, cfg: &ChunkConfig) -> Result<Vec<Chunk>, ChunkError> {
    cfg.validate()?;
    let tokens: Vec<&str> = text.split_whitespace().collect();
    Ok(assemble(doc_id, &windows(tokens.len(), cfg), &tokens, 0))
}

/// Paragraph-aware chunking.
///
/// The text is split at blank-line boundaries; consecutive paragraphs are
/// greedily merged while the merged token count stays within
/// `max_chunk_tokens`. A single paragraph larger than the limit is split
/// internally with the fixed-window scheme. `overlap_tokens` applies only
/// inside such oversized-paragraph splits.
pub fn chunk_semantic(
    doc_id: &str,
    text: &str,
    cfg: &ChunkConfig,
) -> Result<Vec<Chunk>, ChunkError> {
    cfg.validate()?;
    let tokens: Vec<&str> = text.split_whitespace().collect();

    let mut chunks = Vec::new();
    let mut ordinal = 0;
    // (start, len) in document token offsets, one entry per pending merge group.
    let mut group_start = 0usize;
    let mut group_len = 0usize;
    let mut consumed = 0usize;

    let flush = |chunks: &mut Vec<Chunk>, ordinal: &mut usize, start: usize, len: usize| {
        if len == 0 {
            return;
        }
        let spans = [(start, start + len)];
        let built = assemble(doc_id, &spans, &tokens, *ordinal);
        *ordinal += built.len();
        chunks.extend(built);
    };

    for para_len in paragraph_token_lengths(text) {
        if para_len == 0 {
            continue;
        }
        let para_start = consumed;
        consumed += para_len;

        if para_len > cfg.max_chunk_tokens {
            // Oversized paragraph: flush the pending group, then split the
            // paragraph itself with the sliding window.
            flush(&mut chunks, &mut ordinal, group_start, group_len);
            group_len = 0;
            let spans: Vec<(usize, usize)> = windows(para_len, cfg)
                .iter()
                .map(|&(s, e)| (para_start + s, para_start + e))
                .collect();
            let built = assemble(doc_id, &spans, &tokens, ordinal);
            ordinal += built.len();
            chunks.extend(built);
            group_start = consumed;
        } else if group_len == 0 {
            group_start = para_start;
            group_len = para_len;
        } else if group_len + para_len <= cfg.max_chunk_tokens {
            group_len += para_len;
        } else {
            flush(&mut chunks, &mut ordinal, group_start, group_len);
            group_start = para_start;
            group_len = para_len;
        }
    }
    flush(&mut chunks, &mut ordinal, group_start, group_len);
    Ok(chunks)
}

/// Token count of each blank-line-separated paragraph, in order.
fn paragraph_token_lengths(text: &str) -> Vec<usize> {
    let mut lengths = Vec::new();
    let mut current = 0usize;
    for line in text.lines() {
        if line.trim().is_empty() {
            if current > 0 {
                lengths.push(current);
                current = 0;
            }
        } else {
            current += count_tokens(line);
        }
    }
    if current > 0 {
        lengths.push(current);
    }
    lengths
}

/// Sliding-window spans over `n` tokens, with the contained-tail rule.
fn windows(n: usize, cfg: &ChunkConfig) -> Vec<(usize, usize)> {
    let stride = cfg.stride();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut i = 0usize;
    while i * stride < n {
        let start = i * stride;
        let end = (start + cfg.max_chunk_tokens).min(n);
        if let Some(&(_, prev_end)) = spans.last() {
            // start is strictly increasing, so containment reduces to the end.
            if end <= prev_end {
                break;
            }
        }
        spans.push((start, end));
        i += 1;
    }
    spans
}

fn assemble(
    doc_id: &str,
    spans: &[(usize, usize)],
    tokens: &[&str],
    first_ordinal: usize,
) -> Vec<Chunk> {
    spans
        .iter()
        .enumerate()
        .map(|(i, &(start, end))| {
            let ordinal = first_ordinal + i;
            Chunk {
                chunk_id: format!("{doc_id}:{ordinal}"),
                doc_id: doc_id.to_string(),
                ordinal,
                text: tokens[start..end].join(" "),
                token_start: start,
                token_end: end,
            }
        })
        .collect()
}
