//! Answer generation over pluggable chat backends, with conversation
//! memory.
//!
//! Three backends: a chat-completions-style remote endpoint, a local-model
//! HTTP endpoint, and a deterministic offline echo that needs no network —
//! the offline backend is what makes end-to-end behavior testable without
//! a model. HTTP backends retry with exponential backoff (0.5 s · 2^attempt)
//! up to `max_retries` extra attempts.

mod backends;

pub use backends::api_key_from_env_or_dotenv;

use std::time::Instant;

use thiserror::Error;

use crate::embedding::Embedder;
use crate::retrieval::{
    assemble_prompt, citations_for, retrieve, PromptBundle, PromptTemplate, RetrievalError,
};
use crate::vector_store::VectorStore;

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("generation endpoint returned HTTP {status}: {body}")]
    HttpError { status: u16, body: String },
    #[error("generation request timed out")]
    Timeout,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("OPENAI_API_KEY is not set in the environment. Please set it in the .env file.")]
    MissingApiKey,
    #[error("invalid generation response: {0}")]
    InvalidResponse(String),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerationBackend {
    ChatCompletions,
    LocalModel,
    OfflineEcho,
}

impl GenerationBackend {
    pub fn default_model(&self) -> &'static str {
        match self {
            GenerationBackend::ChatCompletions => "gpt-4o",
            GenerationBackend::LocalModel => "Llama3.1",
            GenerationBackend::OfflineEcho => "offline-echo",
        }
    }
}

impl std::str::FromStr for GenerationBackend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "chat" | "chat-completions" => Ok(GenerationBackend::ChatCompletions),
            "local" | "local-model" => Ok(GenerationBackend::LocalModel),
            "offline" | "offline-echo" => Ok(GenerationBackend::OfflineEcho),
            other => Err(format!(
                "unknown backend '{other}' (expected chat|local|offline)"
            )),
        }
    }
}

/// Backend selection and sampling parameters. `OfflineEcho` ignores
/// `model_name` and `endpoint`.
#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub backend: GenerationBackend,
    pub model_name: String,
    pub temperature: f64,
    pub top_p: f64,
    pub endpoint: String,
    pub timeout_s: u64,
    pub max_retries: u32,
    /// Filled from the environment or a dotenv file when absent.
    pub api_key: Option<String>,
}

impl GenerationConfig {
    pub fn new(backend: GenerationBackend) -> Self {
        Self {
            backend,
            model_name: backend.default_model().to_string(),
            temperature: 0.7,
            top_p: 0.9,
            endpoint: String::new(),
            timeout_s: 60,
            max_retries: 2,
            api_key: None,
        }
    }

    pub fn offline() -> Self {
        Self::new(GenerationBackend::OfflineEcho)
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GenerationError::InvalidConfig(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(GenerationError::InvalidConfig(format!(
                "top_p {} outside (0, 1]",
                self.top_p
            )));
        }
        if self.timeout_s == 0 {
            return Err(GenerationError::InvalidConfig(
                "timeout_s must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn backend_label(&self) -> String {
        match self.backend {
            GenerationBackend::OfflineEcho => "offline-echo".to_string(),
            GenerationBackend::ChatCompletions => format!("chat-completions:{}", self.model_name),
            GenerationBackend::LocalModel => format!("local-model:{}", self.model_name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    User,
    Assistant,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Role::User => write!(f, "user"),
            Role::Assistant => write!(f, "assistant"),
        }
    }
}

/// Append-only conversation history bound to one store. Roles strictly
/// alternate starting with the user; [`chat_turn`] appends a user/assistant
/// pair only after the whole turn succeeded.
#[derive(Debug, Clone)]
pub struct ConversationSession {
    pub session_id: String,
    pub turns: Vec<(Role, String)>,
    pub store_name: String,
}

impl ConversationSession {
    pub fn new(session_id: impl Into<String>, store_name: impl Into<String>) -> Self {
        Self {
            session_id: session_id.into(),
            turns: Vec::new(),
            store_name: store_name.into(),
        }
    }

    /// Prior turns as plain transcript text, for prompt memory.
    fn transcript(&self) -> String {
        self.turns
            .iter()
            .map(|(role, text)| format!("{role}: {text}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// An answer with its numbered source citations.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedAnswer {
    pub text: String,
    /// `"[i] source_file"` lines in context order.
    pub citations: Vec<String>,
    pub backend_used: String,
    pub latency_ms: u64,
}

/// Produce an answer for an assembled prompt.
pub fn generate(bundle: &PromptBundle, cfg: &GenerationConfig) -> Result<String, GenerationError> {
    cfg.validate()?;
    match cfg.backend {
        GenerationBackend::OfflineEcho => Ok(offline_echo(bundle)),
        GenerationBackend::ChatCompletions => backends::chat_completions(bundle, cfg),
        GenerationBackend::LocalModel => backends::local_model(bundle, cfg),
    }
}

/// Exact fallback line when retrieval produced no context (mirrors the
/// template's fallback clause).
pub const NO_INFORMATION_ANSWER: &str = "The information is not available in the context provided.";

/// Deterministic offline backend: echoes the first sentence of context
/// block 0 as `Based on [0]: <sentence>`, or the fixed no-information line
/// when there are no context blocks.
fn offline_echo(bundle: &PromptBundle) -> String {
    match first_block_text(&bundle.context) {
        None => NO_INFORMATION_ANSWER.to_string(),
        Some(block) => {
            let sentence = match block.find('.') {
                Some(pos) => &block[..=pos],
                None => block,
            };
            format!("Based on [0]: {sentence}")
        }
    }
}

/// Text of block 0 out of a rendered context section. Blocks are separated
/// by blank lines and chunk text never contains newlines, so the split is
/// unambiguous.
fn first_block_text(context: &str) -> Option<&str> {
    if context == crate::retrieval::NO_CONTEXT_MARKER {
        return None;
    }
    let block = match context.find("\n\n") {
        Some(pos) => &context[..pos],
        None => context,
    };
    let after_open = block.strip_prefix("[0] (")?;
    let sep = after_open.find("): ")?;
    Some(&after_open[sep + 3..])
}

/// Retrieval parameters for a chat turn.
#[derive(Debug, Clone)]
pub struct ChatTurnOptions {
    pub k: usize,
    pub min_score: f64,
    pub template: PromptTemplate,
}

impl Default for ChatTurnOptions {
    fn default() -> Self {
        Self {
            k: 4,
            min_score: 0.0,
            template: PromptTemplate::default(),
        }
    }
}

/// Run one conversational turn: retrieve, assemble (with the session's
/// transcript prepended to the question slot when history exists),
/// generate, then append the user/assistant pair.
///
/// A failed turn leaves the session untouched.
pub fn chat_turn(
    session: &mut ConversationSession,
    store: &VectorStore,
    embedder: &dyn Embedder,
    question: &str,
    cfg: &GenerationConfig,
    options: &ChatTurnOptions,
) -> Result<AnnotatedAnswer, GenerationError> {
    let started = Instant::now();
    let mut result = retrieve(store, embedder, question, options.k, options.min_score)?;
    if !session.turns.is_empty() {
        result.question = format!("{}\n{}: {}", session.transcript(), Role::User, question);
    }
    let bundle = assemble_prompt(&result, &options.template)?;
    let answer = generate(&bundle, cfg)?;
    let citations = citations_for(&result);

    session.turns.push((Role::User, question.to_string()));
    session.turns.push((Role::Assistant, answer.clone()));

    Ok(AnnotatedAnswer {
        text: answer,
        citations,
        backend_used: cfg.backend_label(),
        latency_ms: started.elapsed().as_millis() as u64,
    })
}
