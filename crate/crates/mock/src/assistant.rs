//! Stateful scripted mock of the managed assistant/file-search protocol
//! subset.
//!
//! Endpoints: list/create vector stores, upload file to store (raw body +
//! `x-filename` header), list/create assistants, create thread, create
//! message, create run, get run (serving the scenario's status sequence),
//! list messages (the scripted annotated reply appears once the run
//! completes), get file.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::http::{MockResponse, MockServer, RecordedRequest};

#[derive(Debug, Clone, Deserialize)]
pub struct ScenarioAnnotation {
    /// Exact span in `reply_value` to replace with `[i]`.
    pub text: String,
    pub file_id: String,
}

#[derive(Debug, Clone, Deserialize)]
struct SeedEntry {
    id: String,
    name: String,
}

/// Scripted behavior: run status sequence, the assistant reply and its
/// annotations, plus pre-seeded server state.
#[derive(Debug, Clone, Deserialize)]
pub struct AssistantScenario {
    /// Status served on the n-th run poll; the last entry repeats.
    pub run_statuses: Vec<String>,
    #[serde(default)]
    pub run_error: Option<String>,
    #[serde(default = "default_reply")]
    pub reply_value: String,
    #[serde(default)]
    pub annotations: Vec<ScenarioAnnotation>,
    #[serde(default)]
    seed_vector_stores: Vec<SeedEntry>,
    /// file id → filename.
    #[serde(default)]
    seed_files: BTreeMap<String, String>,
}

fn default_reply() -> String {
    "ok".to_string()
}

impl Default for AssistantScenario {
    fn default() -> Self {
        Self {
            run_statuses: vec!["queued".into(), "in_progress".into(), "completed".into()],
            run_error: None,
            reply_value: default_reply(),
            annotations: Vec::new(),
            seed_vector_stores: Vec::new(),
            seed_files: BTreeMap::new(),
        }
    }
}

impl AssistantScenario {
    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Load a scenario shipped in this crate's `scenarios/` directory.
    pub fn shipped(name: &str) -> Self {
        let path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("scenarios")
            .join(format!("{name}.json"));
        Self::from_file(&path).unwrap_or_else(|e| panic!("loading scenario '{name}': {e}"))
    }
}

#[derive(Default)]
struct State {
    vector_stores: Vec<(String, String)>,
    assistants: Vec<(String, String)>,
    files: BTreeMap<String, String>,
    threads: Vec<String>,
    /// Messages per thread, newest first.
    messages: BTreeMap<String, Vec<Value>>,
    /// run id → (thread id, polls served).
    runs: BTreeMap<String, (String, usize)>,
    /// Threads whose run reached `completed` (reply already appended).
    replied: BTreeMap<String, bool>,
    next_id: u64,
}

impl State {
    fn fresh_id(&mut self, prefix: &str) -> String {
        self.next_id += 1;
        format!("{prefix}-{:04}", self.next_id)
    }
}

pub struct AssistantMock {
    server: MockServer,
}

impl AssistantMock {
    pub fn start(scenario: AssistantScenario) -> Self {
        let mut state = State::default();
        for seed in &scenario.seed_vector_stores {
            state
                .vector_stores
                .push((seed.id.clone(), seed.name.clone()));
        }
        state.files = scenario.seed_files.clone();
        let state = Arc::new(Mutex::new(state));

        let server = MockServer::start(move |req: &RecordedRequest| {
            let mut state = state.lock().expect("mock state");
            route(req, &mut state, &scenario)
        });
        Self { server }
    }

    pub fn url(&self) -> String {
        self.server.url()
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.server.requests()
    }

    pub fn count(&self, method: &str, path_prefix: &str) -> usize {
        self.server.count(method, path_prefix)
    }
}

fn route(req: &RecordedRequest, state: &mut State, scenario: &AssistantScenario) -> MockResponse {
    let segments: Vec<&str> = req.path.trim_matches('/').split('/').collect();
    match (req.method.as_str(), segments.as_slice()) {
        ("GET", ["v1", "vector_stores"]) => listing(&state.vector_stores),
        ("POST", ["v1", "vector_stores"]) => {
            let name = req
                .json()
                .get("name")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            let id = state.fresh_id("vs");
            state.vector_stores.push((id.clone(), name.clone()));
            MockResponse::json(json!({"id": id, "name": name}))
        }
        ("POST", ["v1", "vector_stores", _vs_id, "files"]) => {
            let filename = req.header("x-filename").unwrap_or("upload.pdf").to_string();
            let id = state.fresh_id("file");
            state.files.insert(id.clone(), filename.clone());
            MockResponse::json(json!({"id": id, "filename": filename}))
        }
        ("GET", ["v1", "assistants"]) => listing(&state.assistants),
        ("POST", ["v1", "assistants"]) => {
            let name = req
                .json()
                .get("name")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            let id = state.fresh_id("asst");
            state.assistants.push((id.clone(), name.clone()));
            MockResponse::json(json!({"id": id, "name": name}))
        }
        ("POST", ["v1", "threads"]) => {
            let id = state.fresh_id("thread");
            state.threads.push(id.clone());
            state.messages.insert(id.clone(), Vec::new());
            MockResponse::json(json!({"id": id}))
        }
        ("POST", ["v1", "threads", thread_id, "messages"]) => {
            let thread_id = thread_id.to_string();
            if !state.threads.contains(&thread_id) {
                return MockResponse::not_found();
            }
            let id = state.fresh_id("msg");
            let body = req.json();
            let message = json!({
                "id": id,
                "role": body.get("role").cloned().unwrap_or(json!("user")),
                "content": body.get("content").cloned().unwrap_or(json!([])),
            });
            state
                .messages
                .get_mut(&thread_id)
                .expect("thread exists")
                .insert(0, message);
            MockResponse::json(json!({"id": id}))
        }
        ("POST", ["v1", "threads", thread_id, "runs"]) => {
            let thread_id = thread_id.to_string();
            if !state.threads.contains(&thread_id) {
                return MockResponse::not_found();
            }
            let id = state.fresh_id("run");
            state.runs.insert(id.clone(), (thread_id, 0));
            MockResponse::json(json!({"id": id, "status": "queued"}))
        }
        ("GET", ["v1", "threads", _thread_id, "runs", run_id]) => {
            let run_id = run_id.to_string();
            let Some((thread_id, polls)) = state.runs.get(&run_id).cloned() else {
                return MockResponse::not_found();
            };
            let idx = polls.min(scenario.run_statuses.len().saturating_sub(1));
            let status = scenario.run_statuses[idx].clone();
            state
                .runs
                .insert(run_id.clone(), (thread_id.clone(), polls + 1));

            if status == "completed" && !state.replied.get(&thread_id).copied().unwrap_or(false) {
                state.replied.insert(thread_id.clone(), true);
                let annotations: Vec<Value> = scenario
                    .annotations
                    .iter()
                    .map(|a| {
                        json!({
                            "type": "file_citation",
                            "text": a.text,
                            "file_citation": {"file_id": a.file_id},
                        })
                    })
                    .collect();
                let msg_id = state.fresh_id("msg");
                let reply = json!({
                    "id": msg_id,
                    "role": "assistant",
                    "content": [{
                        "type": "text",
                        "text": {"value": scenario.reply_value, "annotations": annotations},
                    }],
                });
                state
                    .messages
                    .entry(thread_id.clone())
                    .or_default()
                    .insert(0, reply);
            }

            let mut body = json!({"id": run_id, "status": status});
            if status == "failed" {
                body["error"] = json!(scenario
                    .run_error
                    .clone()
                    .unwrap_or_else(|| "scripted failure".to_string()));
            }
            MockResponse::json(body)
        }
        ("GET", ["v1", "threads", thread_id, "messages"]) => {
            let Some(messages) = state.messages.get(*thread_id) else {
                return MockResponse::not_found();
            };
            MockResponse::json(json!({"data": messages}))
        }
        ("GET", ["v1", "files", file_id]) => match state.files.get(*file_id) {
            Some(filename) => MockResponse::json(json!({"id": file_id, "filename": filename})),
            None => MockResponse::not_found(),
        },
        _ => MockResponse::not_found(),
    }
}

fn listing(items: &[(String, String)]) -> MockResponse {
    let data: Vec<Value> = items
        .iter()
        .map(|(id, name)| json!({"id": id, "name": name}))
        .collect();
    MockResponse::json(json!({"data": data}))
}
