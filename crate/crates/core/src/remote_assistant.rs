//! Thin client for a managed assistant/file-search service.
//!
//! Orchestrates the hosted flow: get-or-create vector store by name,
//! upload the PDF corpus (on creation only), get-or-create assistant with
//! the file-search tool bound to that store, open a thread, post the user
//! message, poll the run to a terminal state, and turn the assistant
//! message's annotations into `[i]`-marked text plus `[i] filename`
//! citations.
//!
//! The client targets the protocol subset exercised by that flow. Tests
//! drive it against the scripted mock server shipped in `ragforge-mock`;
//! pointing it at a real endpoint is config-gated and needs a bearer
//! token.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use thiserror::Error;

use crate::generation::AnnotatedAnswer;
use crate::net::{excerpt, HttpClient, HttpFailure};

#[derive(Debug, Error)]
pub enum RemoteAssistantError {
    #[error("'vector_store_name' is not set. Please provide a valid vector store name.")]
    EmptyName,
    #[error("Directory '{0}' does not exist.")]
    DirNotFound(PathBuf),
    #[error("Directory '{0}' is empty. No files to upload.")]
    EmptyDirectory(PathBuf),
    #[error("No PDF files found in directory '{0}'.")]
    NoPdfFiles(PathBuf),
    #[error("assistant endpoint returned HTTP {status}: {body}")]
    HttpError { status: u16, body: String },
    #[error(
        "upload of '{file}' failed with HTTP {status}; uploaded before failure: [{}]",
        uploaded.join(", ")
    )]
    UploadFailed {
        file: String,
        status: u16,
        uploaded: Vec<String>,
    },
    #[error("Run failed: {0}")]
    RunFailed(String),
    #[error("timed out waiting for the remote service")]
    Timeout,
    #[error("assistant endpoint unreachable: {0}")]
    Unavailable(String),
    #[error("invalid response from assistant endpoint: {0}")]
    InvalidResponse(String),
}

type Result<T> = std::result::Result<T, RemoteAssistantError>;

/// Server-issued identifiers accumulated across the flow.
#[derive(Debug, Clone, Default)]
pub struct RemoteIds {
    pub vector_store_id: String,
    pub assistant_id: String,
    pub thread_id: String,
    pub run_id: String,
    pub file_ids: BTreeMap<String, String>,
}

/// Assistant configuration; the file-search tool is bound to exactly one
/// vector store at creation.
#[derive(Debug, Clone)]
pub struct AssistantProfile {
    pub name: String,
    pub description: String,
    pub instructions: String,
    pub model_name: String,
    pub temperature: f64,
    pub top_p: f64,
}

impl AssistantProfile {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            description: String::new(),
            instructions: String::new(),
            model_name: "gpt-4o".to_string(),
            temperature: 0.7,
            top_p: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Queued,
    InProgress,
    Completed,
    Failed,
}

impl RunStatus {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "queued" => Ok(RunStatus::Queued),
            "in_progress" => Ok(RunStatus::InProgress),
            "completed" => Ok(RunStatus::Completed),
            "failed" => Ok(RunStatus::Failed),
            other => Err(RemoteAssistantError::InvalidResponse(format!(
                "unknown run status '{other}'"
            ))),
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, RunStatus::Completed | RunStatus::Failed)
    }
}

/// Polling behavior for [`RemoteAssistantClient::ask_remote`].
#[derive(Debug, Clone, Copy)]
pub struct PollConfig {
    pub interval: Duration,
    pub max_polls: u32,
}

impl Default for PollConfig {
    fn default() -> Self {
        Self {
            interval: Duration::from_secs(1),
            max_polls: 120,
        }
    }
}

pub struct RemoteAssistantClient {
    endpoint: String,
    api_key: Option<String>,
    http: HttpClient,
}

impl RemoteAssistantClient {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        Self::with_timeout(endpoint, api_key, Duration::from_secs(60))
    }

    pub fn with_timeout(
        endpoint: impl Into<String>,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Self {
        let endpoint = endpoint.into().trim_end_matches('/').to_string();
        Self {
            endpoint,
            api_key,
            http: HttpClient::new(timeout),
        }
    }

    /// Get-or-create a vector store by name. Creation (not reuse) uploads
    /// every PDF in `upload_dir` to the new store.
    pub fn ensure_vector_store(&self, name: &str, upload_dir: &Path) -> Result<String> {
        if name.is_empty() {
            return Err(RemoteAssistantError::EmptyName);
        }
        let listing = self.get_json(&format!("{}/v1/vector_stores", self.endpoint))?;
        if let Some(id) = find_by_name(&listing, name) {
            return Ok(id);
        }
        let created = self.post_json_ok(
            &format!("{}/v1/vector_stores", self.endpoint),
            &json!({ "name": name }),
        )?;
        let id = str_field(&created, "id")?;
        self.upload_pdfs(&id, upload_dir)?;
        Ok(id)
    }

    /// Upload every `.pdf` in `dir` (lexicographic order) to the store.
    /// No PDFs is an error, never a silent empty map; a mid-batch HTTP
    /// failure reports the files uploaded before it.
    pub fn upload_pdfs(
        &self,
        vector_store_id: &str,
        dir: &Path,
    ) -> Result<BTreeMap<String, String>> {
        if !dir.is_dir() {
            return Err(RemoteAssistantError::DirNotFound(dir.to_path_buf()));
        }
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| {
                RemoteAssistantError::InvalidResponse(format!("reading {}: {e}", dir.display()))
            })?
            .filter_map(|entry| entry.ok())
            .map(|entry| entry.path())
            .filter(|path| path.is_file())
            .collect();
        if entries.is_empty() {
            return Err(RemoteAssistantError::EmptyDirectory(dir.to_path_buf()));
        }
        entries.retain(|path| {
            path.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pdf"))
        });
        if entries.is_empty() {
            return Err(RemoteAssistantError::NoPdfFiles(dir.to_path_buf()));
        }
        entries.sort_by_key(|p| p.file_name().map(|n| n.to_os_string()));

        let url = format!("{}/v1/vector_stores/{vector_store_id}/files", self.endpoint);
        let mut file_ids = BTreeMap::new();
        for path in entries {
            let file_name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let bytes = std::fs::read(&path).map_err(|e| {
                RemoteAssistantError::InvalidResponse(format!("reading {}: {e}", path.display()))
            })?;
            let bearer = self.bearer();
            let mut headers: Vec<(&str, &str)> =
                bearer.iter().map(|(k, v)| (*k, v.as_str())).collect();
            headers.push(("x-filename", file_name.as_str()));
            headers.push(("content-type", "application/pdf"));
            let (status, body) = self
                .http
                .post_bytes(&url, &headers, &bytes)
                .map_err(map_transport)?;
            if status != 200 {
                return Err(RemoteAssistantError::UploadFailed {
                    file: file_name,
                    status,
                    uploaded: file_ids.keys().cloned().collect(),
                });
            }
            let parsed: Value = serde_json::from_str(&body).map_err(|e| {
                RemoteAssistantError::InvalidResponse(format!("upload response: {e}"))
            })?;
            file_ids.insert(file_name, str_field(&parsed, "id")?);
        }
        Ok(file_ids)
    }

    /// Get-or-create an assistant by profile name. The create request
    /// carries the file-search tool bound to `vector_store_id` and the
    /// profile's sampling parameters.
    pub fn ensure_assistant(
        &self,
        profile: &AssistantProfile,
        vector_store_id: &str,
    ) -> Result<String> {
        let listing = self.get_json(&format!("{}/v1/assistants", self.endpoint))?;
        if let Some(id) = find_by_name(&listing, &profile.name) {
            return Ok(id);
        }
        let body = json!({
            "model": profile.model_name,
            "name": profile.name,
            "description": profile.description,
            "instructions": profile.instructions,
            "tools": [{"type": "file_search"}],
            "tool_resources": {"file_search": {"vector_store_ids": [vector_store_id]}},
            "temperature": profile.temperature,
            "top_p": profile.top_p,
        });
        let created = self.post_json_ok(&format!("{}/v1/assistants", self.endpoint), &body)?;
        str_field(&created, "id")
    }

    /// Create a conversation thread with file-search bound to the store.
    pub fn create_thread(&self, vector_store_id: &str) -> Result<String> {
        let body = json!({
            "tool_resources": {"file_search": {"vector_store_ids": [vector_store_id]}}
        });
        let created = self.post_json_ok(&format!("{}/v1/threads", self.endpoint), &body)?;
        str_field(&created, "id")
    }

    /// Post a question, run the assistant, poll to completion, and return
    /// the annotated answer.
    ///
    /// At most `poll.max_polls` status requests are issued; a run that
    /// never reaches a terminal state within the budget is a timeout. On
    /// completion the newest assistant message is fetched (retried up to 3
    /// times — conforming servers have it immediately, some real ones lag)
    /// and each annotation's text span is replaced with `[i]`, collecting
    /// `[i] filename` citation lines.
    pub fn ask_remote(
        &self,
        thread_id: &str,
        assistant_id: &str,
        question: &str,
        poll: PollConfig,
    ) -> Result<AnnotatedAnswer> {
        let started = Instant::now();
        let message_body = json!({
            "role": "user",
            "content": [{"type": "text", "text": question}],
        });
        self.post_json_ok(
            &format!("{}/v1/threads/{thread_id}/messages", self.endpoint),
            &message_body,
        )?;

        let run = self.post_json_ok(
            &format!("{}/v1/threads/{thread_id}/runs", self.endpoint),
            &json!({ "assistant_id": assistant_id }),
        )?;
        let run_id = str_field(&run, "id")?;

        let mut completed = false;
        for poll_round in 0..poll.max_polls {
            let status_value = self.get_json(&format!(
                "{}/v1/threads/{thread_id}/runs/{run_id}",
                self.endpoint
            ))?;
            let status = RunStatus::parse(
                status_value
                    .get("status")
                    .and_then(Value::as_str)
                    .unwrap_or(""),
            )?;
            match status {
                RunStatus::Completed => {
                    completed = true;
                    break;
                }
                RunStatus::Failed => {
                    let detail = status_value
                        .get("error")
                        .map(|e| match e {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .unwrap_or_else(|| "unknown error".to_string());
                    return Err(RemoteAssistantError::RunFailed(detail));
                }
                RunStatus::Queued | RunStatus::InProgress => {
                    if poll_round + 1 < poll.max_polls && !poll.interval.is_zero() {
                        std::thread::sleep(poll.interval);
                    }
                }
            }
        }
        if !completed {
            return Err(RemoteAssistantError::Timeout);
        }

        let message = self.fetch_assistant_message(thread_id, poll)?;
        let (text, citations) = self.annotate(&message)?;
        Ok(AnnotatedAnswer {
            text,
            citations,
            backend_used: "remote-assistant".to_string(),
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }

    fn fetch_assistant_message(&self, thread_id: &str, poll: PollConfig) -> Result<Value> {
        for round in 0..3 {
            let listing = self.get_json(&format!(
                "{}/v1/threads/{thread_id}/messages",
                self.endpoint
            ))?;
            let found = listing
                .get("data")
                .and_then(Value::as_array)
                .and_then(|messages| {
                    messages
                        .iter()
                        .find(|m| {
                            m.get("role").and_then(Value::as_str) == Some("assistant")
                                && m.get("content")
                                    .and_then(Value::as_array)
                                    .is_some_and(|c| !c.is_empty())
                        })
                        .cloned()
                });
            if let Some(message) = found {
                return Ok(message);
            }
            if round < 2 && !poll.interval.is_zero() {
                std::thread::sleep(poll.interval);
            }
        }
        Err(RemoteAssistantError::InvalidResponse(
            "run completed but no assistant message appeared".into(),
        ))
    }

    /// Replace each annotation's text span with `[i]` and build the
    /// citation list from the cited files.
    fn annotate(&self, message: &Value) -> Result<(String, Vec<String>)> {
        let text_obj = message
            .pointer("/content/0/text")
            .ok_or_else(|| RemoteAssistantError::InvalidResponse("message has no text".into()))?;
        let mut value = text_obj
            .get("value")
            .and_then(Value::as_str)
            .ok_or_else(|| RemoteAssistantError::InvalidResponse("text has no value".into()))?
            .to_string();
        let annotations = text_obj
            .get("annotations")
            .and_then(Value::as_array)
            .cloned()
            .unwrap_or_default();

        let mut citations = Vec::new();
        for (index, annotation) in annotations.iter().enumerate() {
            if let Some(span) = annotation.get("text").and_then(Value::as_str) {
                value = value.replace(span, &format!("[{index}]"));
            }
            if let Some(file_id) = annotation
                .pointer("/file_citation/file_id")
                .and_then(Value::as_str)
            {
                let file = self.get_json(&format!("{}/v1/files/{file_id}", self.endpoint))?;
                let filename = str_field(&file, "filename")?;
                citations.push(format!("[{index}] {filename}"));
            }
        }
        Ok((value, citations))
    }

    fn get_json(&self, url: &str) -> Result<Value> {
        let headers = self.bearer();
        let header_refs: Vec<(&str, &str)> =
            headers.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let (status, body) = self.http.get(url, &header_refs).map_err(map_transport)?;
        expect_200(status, body)
    }

    fn post_json_ok(&self, url: &str, body: &Value) -> Result<Value> {
        let headers = self.bearer();
        let header_refs: Vec<(&str, &str)> =
            headers.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let (status, text) = self
            .http
            .post_json(url, &header_refs, body)
            .map_err(map_transport)?;
        expect_200(status, text)
    }

    fn bearer(&self) -> Vec<(&'static str, String)> {
        match &self.api_key {
            Some(key) => vec![("authorization", format!("Bearer {key}"))],
            None => Vec::new(),
        }
    }
}

fn expect_200(status: u16, body: String) -> Result<Value> {
    if status != 200 {
        return Err(RemoteAssistantError::HttpError {
            status,
            body: excerpt(&body, 200),
        });
    }
    serde_json::from_str(&body)
        .map_err(|e| RemoteAssistantError::InvalidResponse(format!("bad JSON: {e}")))
}

fn map_transport(f: HttpFailure) -> RemoteAssistantError {
    match f {
        HttpFailure::Timeout => RemoteAssistantError::Timeout,
        HttpFailure::Unavailable(msg) => RemoteAssistantError::Unavailable(msg),
        HttpFailure::Other(msg) => RemoteAssistantError::InvalidResponse(msg),
    }
}

fn find_by_name(listing: &Value, name: &str) -> Option<String> {
    listing
        .get("data")
        .and_then(Value::as_array)?
        .iter()
        .find(|item| item.get("name").and_then(Value::as_str) == Some(name))
        .and_then(|item| item.get("id").and_then(Value::as_str))
        .map(str::to_string)
}

fn str_field(value: &Value, field: &str) -> Result<String> {
    value
        .get(field)
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| RemoteAssistantError::InvalidResponse(format!("response missing '{field}'")))
}
