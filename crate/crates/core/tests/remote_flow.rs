//! Remote-assistant protocol flow against the scripted mock server:
//! get-or-create semantics, upload guards, request-shape conformance, run
//! polling and citation annotation handling.

use std::path::Path;
use std::time::Duration;

use tempfile::TempDir;

use ragforge::pdf::writer::PdfBuilder;
use ragforge::remote_assistant::{
    AssistantProfile, PollConfig, RemoteAssistantClient, RemoteAssistantError,
};
use ragforge_mock::{AssistantMock, AssistantScenario};

fn client(mock: &AssistantMock) -> RemoteAssistantClient {
    RemoteAssistantClient::with_timeout(mock.url(), None, Duration::from_secs(5))
}

fn corpus_with_pdfs(names: &[&str]) -> TempDir {
    let tmp = TempDir::new().unwrap();
    for name in names {
        PdfBuilder::new()
            .page(&[&format!("content of {name}")])
            .write_to(&tmp.path().join(name))
            .unwrap();
    }
    tmp
}

fn fast_poll(max_polls: u32) -> PollConfig {
    PollConfig {
        interval: Duration::ZERO,
        max_polls,
    }
}

#[test]
fn ensure_vector_store_is_create_once() {
    let mock = AssistantMock::start(AssistantScenario::default());
    let corpus = corpus_with_pdfs(&["a.pdf"]);
    let client = client(&mock);

    let first = client.ensure_vector_store("kb", corpus.path()).unwrap();
    let second = client.ensure_vector_store("kb", corpus.path()).unwrap();
    assert_eq!(first, second);
    assert_eq!(mock.count("POST", "/v1/vector_stores"), 2); // 1 create + 1 upload
    assert_eq!(mock.count("GET", "/v1/vector_stores"), 2);
    // Upload ran only for the creating call.
    let uploads = mock
        .requests()
        .iter()
        .filter(|r| r.method == "POST" && r.path.contains("/files"))
        .count();
    assert_eq!(uploads, 1);
}

#[test]
fn preseeded_store_is_reused_with_zero_creates() {
    let mock = AssistantMock::start(AssistantScenario::shipped("preseeded_store"));
    let corpus = corpus_with_pdfs(&["a.pdf"]);
    let id = client(&mock)
        .ensure_vector_store("kb", corpus.path())
        .unwrap();
    assert_eq!(id, "vs-seeded-kb");
    let creates = mock
        .requests()
        .iter()
        .filter(|r| r.method == "POST" && r.path == "/v1/vector_stores")
        .count();
    assert_eq!(creates, 0);
}

#[test]
fn empty_name_fails_before_any_request() {
    let mock = AssistantMock::start(AssistantScenario::default());
    let corpus = corpus_with_pdfs(&["a.pdf"]);
    let err = client(&mock)
        .ensure_vector_store("", corpus.path())
        .unwrap_err();
    assert!(matches!(err, RemoteAssistantError::EmptyName));
    assert!(err.to_string().contains("'vector_store_name' is not set"));
    assert_eq!(mock.requests().len(), 0);
}

#[test]
fn upload_pdfs_uploads_each_file() {
    let mock = AssistantMock::start(AssistantScenario::default());
    let corpus = corpus_with_pdfs(&["one.pdf", "two.pdf"]);
    let map = client(&mock).upload_pdfs("vs-x", corpus.path()).unwrap();
    assert_eq!(map.len(), 2);
    assert!(map.contains_key("one.pdf"));
    assert!(map.contains_key("two.pdf"));
    assert_eq!(mock.count("POST", "/v1/vector_stores/vs-x/files"), 2);
    // File name travels in the x-filename header, lexicographic order.
    let names: Vec<String> = mock
        .requests()
        .iter()
        .filter(|r| r.path.contains("/files"))
        .filter_map(|r| r.header("x-filename").map(str::to_string))
        .collect();
    assert_eq!(names, vec!["one.pdf", "two.pdf"]);
}

#[test]
fn upload_dir_with_only_txt_is_no_pdf_files() {
    let mock = AssistantMock::start(AssistantScenario::default());
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("notes.txt"), "not a pdf").unwrap();
    let err = client(&mock).upload_pdfs("vs-x", tmp.path()).unwrap_err();
    match &err {
        RemoteAssistantError::NoPdfFiles(dir) => assert_eq!(dir, tmp.path()),
        other => panic!("expected NoPdfFiles, got {other:?}"),
    }
    assert!(err.to_string().contains("No PDF files found in directory"));
}

#[test]
fn upload_missing_dir_names_the_path() {
    let mock = AssistantMock::start(AssistantScenario::default());
    let err = client(&mock)
        .upload_pdfs("vs-x", Path::new("/nonexistent-upload-dir"))
        .unwrap_err();
    assert!(err
        .to_string()
        .contains("Directory '/nonexistent-upload-dir' does not exist."));
}

#[test]
fn upload_empty_dir_is_empty_directory() {
    let mock = AssistantMock::start(AssistantScenario::default());
    let tmp = TempDir::new().unwrap();
    let err = client(&mock).upload_pdfs("vs-x", tmp.path()).unwrap_err();
    assert!(matches!(err, RemoteAssistantError::EmptyDirectory(_)));
    assert!(err.to_string().contains("is empty"));
}

#[test]
fn ensure_assistant_create_carries_sampling_defaults() {
    let mock = AssistantMock::start(AssistantScenario::default());
    let client = client(&mock);
    let profile = AssistantProfile::new("rag-helper");
    assert_eq!(profile.model_name, "gpt-4o");

    let id = client.ensure_assistant(&profile, "vs-1").unwrap();
    assert!(!id.is_empty());

    let create = mock
        .requests()
        .into_iter()
        .find(|r| r.method == "POST" && r.path == "/v1/assistants")
        .expect("create request");
    let body = create.json();
    assert_eq!(body["temperature"], 0.7);
    assert_eq!(body["top_p"], 0.9);
    assert_eq!(body["model"], "gpt-4o");
    assert_eq!(body["tools"][0]["type"], "file_search");
    assert_eq!(
        body["tool_resources"]["file_search"]["vector_store_ids"][0],
        "vs-1"
    );

    // Second ensure reuses by name: still exactly one create.
    let again = client.ensure_assistant(&profile, "vs-1").unwrap();
    assert_eq!(again, id);
    assert_eq!(mock.count("POST", "/v1/assistants"), 1);
}

#[test]
fn create_thread_binds_the_store() {
    let mock = AssistantMock::start(AssistantScenario::default());
    let id = client(&mock).create_thread("vs-42").unwrap();
    assert!(!id.is_empty());
    let req = mock
        .requests()
        .into_iter()
        .find(|r| r.path == "/v1/threads")
        .unwrap();
    assert_eq!(
        req.json()["tool_resources"]["file_search"]["vector_store_ids"][0],
        "vs-42"
    );
}

#[test]
fn annotated_completion_yields_marked_text_and_citations() {
    let mock = AssistantMock::start(AssistantScenario::shipped("completed_with_citation"));
    let client = client(&mock);
    let thread = client.create_thread("vs-1").unwrap();
    let answer = client
        .ask_remote(
            &thread,
            "asst-1",
            "what is the retention policy?",
            fast_poll(10),
        )
        .unwrap();
    assert_eq!(
        answer.text,
        "The retention policy is ninety days[0] as stated in the handbook."
    );
    assert_eq!(answer.citations, vec!["[0] a.pdf"]);
    assert_eq!(answer.backend_used, "remote-assistant");
}

#[test]
fn failed_run_raises_run_failed_with_detail() {
    let mock = AssistantMock::start(AssistantScenario::shipped("run_failed"));
    let client = client(&mock);
    let thread = client.create_thread("vs-1").unwrap();
    let err = client
        .ask_remote(&thread, "asst-1", "q", fast_poll(10))
        .unwrap_err();
    match &err {
        RemoteAssistantError::RunFailed(detail) => {
            assert!(detail.contains("rate limit exceeded"))
        }
        other => panic!("expected RunFailed, got {other:?}"),
    }
    assert!(err.to_string().starts_with("Run failed:"));
}

#[test]
fn never_completing_run_times_out_after_exactly_max_polls() {
    let mock = AssistantMock::start(AssistantScenario::shipped("never_completes"));
    let client = client(&mock);
    let thread = client.create_thread("vs-1").unwrap();
    let err = client
        .ask_remote(&thread, "asst-1", "q", fast_poll(3))
        .unwrap_err();
    assert!(matches!(err, RemoteAssistantError::Timeout));
    let polls = mock
        .requests()
        .iter()
        .filter(|r| r.method == "GET" && r.path.contains("/runs/"))
        .count();
    assert_eq!(polls, 3);
}

#[test]
fn multiple_annotations_number_in_order() {
    let scenario: AssistantScenario = serde_json::from_value(serde_json::json!({
        "run_statuses": ["completed"],
        "reply_value": "First«a» then «b» end.",
        "annotations": [
            {"text": "«a»", "file_id": "file-1"},
            {"text": "«b»", "file_id": "file-2"}
        ],
        "seed_files": {"file-1": "one.pdf", "file-2": "two.pdf"}
    }))
    .unwrap();
    let mock = AssistantMock::start(scenario);
    let client = client(&mock);
    let thread = client.create_thread("vs-1").unwrap();
    let answer = client
        .ask_remote(&thread, "asst-1", "q", fast_poll(5))
        .unwrap();
    assert_eq!(answer.text, "First[0] then [1] end.");
    assert_eq!(answer.citations, vec!["[0] one.pdf", "[1] two.pdf"]);
}
