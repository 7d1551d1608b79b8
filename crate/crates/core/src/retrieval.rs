//! Query-side pipeline: embed the question, search the store, assemble the
//! context-infused prompt and prepare citation mappings.

use std::path::Path;

use thiserror::Error;

use crate::embedding::{Embedder, EmbeddingError};
use crate::vector_store::{SearchHit, StoreError, VectorStore};

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error(
        "embedder mismatch: store expects '{store}', query embedder is '{query}'. \
         The same embedder must be used for indexing and querying."
    )]
    EmbedderMismatch { store: String, query: String },
    #[error("bad prompt template: {0}")]
    BadTemplate(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// One retrieved chunk prepared for prompting: `citation_index` is the
/// position in the hit list and doubles as the `[i]` marker.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextBlock {
    pub citation_index: usize,
    pub source_file: String,
    pub chunk_text: String,
}

#[derive(Debug)]
pub struct RetrievalResult<'a> {
    pub question: String,
    pub hits: Vec<SearchHit<'a>>,
    pub context_blocks: Vec<ContextBlock>,
}

/// The answer-grounding template. Must contain exactly one `{context}` and
/// exactly one `{question}` slot.
#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub text: String,
}

/// Default instruction template for grounded answering (context slot,
/// question slot, and the fallback clause requiring the model to say when
/// the context is insufficient).
pub const DEFAULT_PROMPT_TEMPLATE: &str = "\
You are an expert assistant with access to the following context extracted from documents. Your job is to answer the user's question as accurately as possible, using the context below.

Context:
{context}

Given this information, please provide a comprehensive and relevant answer to the following question:
Question: {question}

If the context does not contain enough information, clearly state that the information is not available in the context provided.
If possible, provide a step-by-step explanation and highlight key details.";

/// Rendered in place of the context section when retrieval found nothing.
pub const NO_CONTEXT_MARKER: &str = "NO CONTEXT RETRIEVED";

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            text: DEFAULT_PROMPT_TEMPLATE.to_string(),
        }
    }
}

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Result<Self, RetrievalError> {
        let template = Self { text: text.into() };
        template.validate()?;
        Ok(template)
    }

    pub fn from_file(path: &Path) -> Result<Self, RetrievalError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RetrievalError::BadTemplate(format!("{}: {e}", path.display())))?;
        Self::new(text)
    }

    pub fn validate(&self) -> Result<(), RetrievalError> {
        for slot in ["{context}", "{question}"] {
            match self.text.matches(slot).count() {
                1 => {}
                0 => return Err(RetrievalError::BadTemplate(format!("missing {slot} slot"))),
                n => {
                    return Err(RetrievalError::BadTemplate(format!(
                        "{slot} slot appears {n} times, expected exactly once"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Leading paragraph (text up to the first blank line), used as the
    /// system message by chat backends. Empty when the first paragraph
    /// already contains a slot.
    pub fn system_instructions(&self) -> &str {
        let head = match self.text.find("\n\n") {
            Some(pos) => &self.text[..pos],
            None => return "",
        };
        if head.contains("{context}") || head.contains("{question}") {
            ""
        } else {
            head
        }
    }
}

/// A prompt ready for a generation backend.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub system_instructions: String,
    /// The rendered context section (block list or the no-context marker).
    pub context: String,
    pub question: String,
    /// Full template with both slots filled.
    pub rendered: String,
}

impl PromptBundle {
    /// The rendered prompt minus the system preamble; what chat-style
    /// backends send as the user message.
    pub fn user_message(&self) -> &str {
        match self
            .rendered
            .strip_prefix(self.system_instructions.as_str())
        {
            Some(rest) if !self.system_instructions.is_empty() => rest.trim_start(),
            _ => &self.rendered,
        }
    }
}

/// Embed `question` with the store's own embedder and run top-k search.
///
/// Refuses to run when the query embedder's identity differs from the
/// store's: mixing embedders silently breaks retrieval, so it is an error,
/// not a warning.
pub fn retrieve<'a>(
    store: &'a VectorStore,
    embedder: &dyn Embedder,
    question: &str,
    k: usize,
    min_score: f64,
) -> Result<RetrievalResult<'a>, RetrievalError> {
    let store_embedder = &store.manifest().embedder_id;
    let query_embedder = embedder.embedder_id();
    if *store_embedder != query_embedder {
        return Err(RetrievalError::EmbedderMismatch {
            store: store_embedder.clone(),
            query: query_embedder,
        });
    }
    let query_vector = embedder.embed(question)?;
    let hits = store.search(&query_vector, k, min_score)?;
    let context_blocks = hits
        .iter()
        .enumerate()
        .map(|(i, hit)| ContextBlock {
            citation_index: i,
            source_file: hit.record.source_file.clone(),
            chunk_text: hit.record.chunk.text.clone(),
        })
        .collect();
    Ok(RetrievalResult {
        question: question.to_string(),
        hits,
        context_blocks,
    })
}

/// Render the context section: one `[i] (source_file): chunk_text`
/// paragraph per block, or the no-context marker.
pub fn render_context(blocks: &[ContextBlock]) -> String {
    if blocks.is_empty() {
        return NO_CONTEXT_MARKER.to_string();
    }
    blocks
        .iter()
        .map(|b| {
            format!(
                "[{}] ({}): {}",
                b.citation_index, b.source_file, b.chunk_text
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Fill the template's slots with the retrieval result.
pub fn assemble_prompt(
    result: &RetrievalResult<'_>,
    template: &PromptTemplate,
) -> Result<PromptBundle, RetrievalError> {
    template.validate()?;
    let context = render_context(&result.context_blocks);
    let rendered = fill_slots(&template.text, &context, &result.question);
    Ok(PromptBundle {
        system_instructions: template.system_instructions().to_string(),
        context,
        question: result.question.clone(),
        rendered,
    })
}

/// One citation line per context block, formatted exactly `[i] name`.
/// Duplicate file names keep separate entries; the indices differ.
pub fn citations_for(result: &RetrievalResult<'_>) -> Vec<String> {
    result
        .context_blocks
        .iter()
        .map(|b| format!("[{}] {}", b.citation_index, b.source_file))
        .collect()
}

/// Single-pass slot filling: substituted text is never rescanned, so a
/// question containing `{context}` (or vice versa) cannot corrupt the
/// render.
fn fill_slots(template: &str, context: &str, question: &str) -> String {
    let mut out = String::with_capacity(template.len() + context.len() + question.len());
    let mut rest = template;
    loop {
        let ctx_pos = rest.find("{context}");
        let q_pos = rest.find("{question}");
        match (ctx_pos, q_pos) {
            (None, None) => {
                out.push_str(rest);
                return out;
            }
            (Some(c), q) if q.is_none() || c < q.unwrap() => {
                out.push_str(&rest[..c]);
                out.push_str(context);
                rest = &rest[c + "{context}".len()..];
            }
            (_, Some(q)) => {
                out.push_str(&rest[..q]);
                out.push_str(question);
                rest = &rest[q + "{question}".len()..];
            }
            _ => unreachable!(),
        }
    }
}
