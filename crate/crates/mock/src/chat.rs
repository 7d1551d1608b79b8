//! Scripted chat-completions / local-generate / embeddings endpoints.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use crate::http::{MockResponse, MockServer, RecordedRequest};

/// Behavior of a generation route.
#[derive(Debug, Clone)]
pub struct ChatScript {
    pub reply: String,
    /// Fail this many requests (with `fail_status`) before succeeding.
    pub fail_first: u32,
    pub fail_status: u16,
    pub delay: Duration,
}

impl ChatScript {
    pub fn reply(text: impl Into<String>) -> Self {
        Self {
            reply: text.into(),
            fail_first: 0,
            fail_status: 500,
            delay: Duration::ZERO,
        }
    }

    pub fn fail_first(mut self, count: u32, status: u16) -> Self {
        self.fail_first = count;
        self.fail_status = status;
        self
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }
}

/// Behavior of the embeddings route.
#[derive(Debug, Clone)]
pub struct EmbeddingsScript {
    pub dimension: usize,
    /// Subtracted from the advertised dimension, for wrong-length tests.
    pub shrink_by: usize,
    pub status: u16,
}

impl EmbeddingsScript {
    /// Deterministic vectors of the given dimension.
    pub fn identity(dimension: usize) -> Self {
        Self {
            dimension,
            shrink_by: 0,
            status: 200,
        }
    }

    /// Vectors one element short of the advertised dimension.
    pub fn wrong_length(dimension: usize) -> Self {
        Self {
            dimension,
            shrink_by: 1,
            status: 200,
        }
    }

    pub fn failing(status: u16) -> Self {
        Self {
            dimension: 1,
            shrink_by: 0,
            status,
        }
    }
}

/// One server scripting `/v1/chat/completions`, `/api/generate` and
/// `/v1/embeddings`.
pub struct ChatMock {
    server: MockServer,
}

impl ChatMock {
    pub fn start(chat: ChatScript, local: ChatScript, embeddings: EmbeddingsScript) -> Self {
        let chat_fails = Arc::new(Mutex::new(chat.fail_first));
        let local_fails = Arc::new(Mutex::new(local.fail_first));
        let server = MockServer::start(move |req: &RecordedRequest| {
            match (req.method.as_str(), req.path.as_str()) {
                ("POST", "/v1/chat/completions") => {
                    let mut left = chat_fails.lock().expect("fail counter");
                    if *left > 0 {
                        *left -= 1;
                        return MockResponse::status(
                            chat.fail_status,
                            "{\"error\":\"scripted failure\"}",
                        );
                    }
                    MockResponse::json(json!({
                        "id": "chatcmpl-mock",
                        "choices": [{
                            "index": 0,
                            "message": {"role": "assistant", "content": chat.reply},
                            "finish_reason": "stop"
                        }]
                    }))
                    .with_delay(chat.delay)
                }
                ("POST", "/api/generate") => {
                    let mut left = local_fails.lock().expect("fail counter");
                    if *left > 0 {
                        *left -= 1;
                        return MockResponse::status(
                            local.fail_status,
                            "{\"error\":\"scripted failure\"}",
                        );
                    }
                    let model = req
                        .json()
                        .get("model")
                        .and_then(Value::as_str)
                        .unwrap_or("unknown")
                        .to_string();
                    MockResponse::json(json!({
                        "model": model,
                        "response": local.reply,
                        "done": true
                    }))
                    .with_delay(local.delay)
                }
                ("POST", "/v1/embeddings") => {
                    if embeddings.status != 200 {
                        return MockResponse::status(
                            embeddings.status,
                            "{\"error\":\"scripted failure\"}",
                        );
                    }
                    let inputs = req
                        .json()
                        .get("input")
                        .and_then(Value::as_array)
                        .map(|a| a.len())
                        .unwrap_or(0);
                    let len = embeddings.dimension.saturating_sub(embeddings.shrink_by);
                    // Served in reverse index order: clients must reassemble
                    // by the "index" field, not response position.
                    let data: Vec<Value> = (0..inputs)
                        .rev()
                        .map(|i| {
                            let mut vector = vec![0.0f64; len];
                            if len > 0 {
                                vector[i % len] = (i + 1) as f64;
                            }
                            json!({"index": i, "embedding": vector})
                        })
                        .collect();
                    MockResponse::json(json!({"data": data}))
                }
                _ => MockResponse::not_found(),
            }
        });
        Self { server }
    }

    /// Server answering every generation route with the same fixed body.
    pub fn replying(text: &str) -> Self {
        Self::start(
            ChatScript::reply(text),
            ChatScript::reply(text),
            EmbeddingsScript::identity(4),
        )
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
