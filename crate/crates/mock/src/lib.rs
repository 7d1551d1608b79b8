//! Scripted mock HTTP servers for protocol-conformance tests.
//!
//! [`MockServer`] is a minimal threaded HTTP/1.1 server that records every
//! request it receives and answers from a handler closure. On top of it:
//!
//! - [`ChatMock`] scripts the chat-completions, local-generate and
//!   embeddings endpoints, including fail-N-times and delay behaviors for
//!   retry and timeout tests.
//! - [`AssistantMock`] is a stateful scripted implementation of the
//!   managed assistant/file-search protocol subset (vector stores, file
//!   uploads, assistants, threads, messages, runs with scripted status
//!   sequences, annotated replies). Scenarios load from JSON files shipped
//!   under `scenarios/`.
//!
//! Everything binds to `127.0.0.1:0`; no test touches a real network.

mod assistant;
mod chat;
mod http;

pub use assistant::{AssistantMock, AssistantScenario, ScenarioAnnotation};
pub use chat::{ChatMock, ChatScript, EmbeddingsScript};
pub use http::{MockResponse, MockServer, RecordedRequest};

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpStream;

    fn raw_request(addr: &str, payload: &str) -> String {
        let mut stream = TcpStream::connect(addr).unwrap();
        stream.write_all(payload.as_bytes()).unwrap();
        let mut response = String::new();
        stream.read_to_string(&mut response).unwrap();
        response
    }

    #[test]
    fn server_records_requests_and_answers() {
        let server = MockServer::start(|req| {
            assert_eq!(req.method, "POST");
            MockResponse::json(serde_json::json!({"echo": req.body_str()}))
        });
        let addr = server.url().trim_start_matches("http://").to_string();
        let body = "{\"k\":1}";
        let response = raw_request(
            &addr,
            &format!(
                "POST /v1/test HTTP/1.1\r\nhost: x\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{}",
                body.len(),
                body
            ),
        );
        assert!(response.starts_with("HTTP/1.1 200 OK"));
        assert!(response.contains("{\"echo\":\"{\\\"k\\\":1}\"}"));

        let recorded = server.requests();
        assert_eq!(recorded.len(), 1);
        assert_eq!(recorded[0].path, "/v1/test");
        assert_eq!(recorded[0].header("content-type"), Some("application/json"));
        assert_eq!(server.count("POST", "/v1/"), 1);
    }

    #[test]
    fn unknown_route_is_404() {
        let server = MockServer::start(|_| MockResponse::not_found());
        let addr = server.url().trim_start_matches("http://").to_string();
        let response = raw_request(&addr, "GET /missing HTTP/1.1\r\nhost: x\r\n\r\n");
        assert!(response.starts_with("HTTP/1.1 404"));
    }

    #[test]
    fn all_shipped_scenarios_load() {
        for name in [
            "completed_with_citation",
            "run_failed",
            "never_completes",
            "preseeded_store",
        ] {
            let scenario = AssistantScenario::shipped(name);
            assert!(!scenario.run_statuses.is_empty(), "{name}");
        }
    }
}
