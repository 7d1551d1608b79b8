//! End-to-end CLI behavior: command output, exit codes, REPL loop, golden
//! one-shot output, and the remote commands against the scripted mock.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

use ragforge::pdf::writer::PdfBuilder;
use ragforge_mock::{AssistantMock, AssistantScenario};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ragforge"))
}

fn write_fixture_corpus(dir: &Path) {
    std::fs::write(
        dir.join("solar.txt"),
        "The solar array produces nine kilowatts at noon. It feeds the battery bank.",
    )
    .unwrap();
    std::fs::write(
        dir.join("generator.txt"),
        "The backup generator burns diesel. It starts automatically during outages.",
    )
    .unwrap();
}

struct Workspace {
    _tmp: TempDir,
    corpus: PathBuf,
    stores: PathBuf,
}

fn workspace() -> Workspace {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    let stores = tmp.path().join("stores");
    std::fs::create_dir_all(&corpus).unwrap();
    write_fixture_corpus(&corpus);
    Workspace {
        corpus,
        stores,
        _tmp: tmp,
    }
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn ingest(ws: &Workspace) -> Output {
    bin()
        .args(["ingest", "--store", "kb"])
        .arg("--corpus")
        .arg(&ws.corpus)
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap()
}

#[test]
fn ingest_then_ask_once_matches_golden_bytes() {
    let ws = workspace();
    let out = ingest(&ws);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("2 documents, 2 chunks, 2 records"));

    let ask = bin()
        .args([
            "ask",
            "--store",
            "kb",
            "--backend",
            "offline",
            "--once",
            "solar array kilowatts noon",
        ])
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    assert!(ask.status.success(), "stderr: {}", stderr_of(&ask));
    let golden = std::fs::read(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/golden/ask_once.txt"
    ))
    .unwrap();
    assert_eq!(ask.stdout, golden, "got:\n{}", stdout_of(&ask));
}

#[test]
fn rerun_reports_duplicates_and_keeps_count() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    let second = ingest(&ws);
    assert!(second.status.success());
    let text = stdout_of(&second);
    assert!(text.contains("2 duplicates skipped"), "got: {text}");
    assert!(text.contains("0 documents, 0 chunks, 0 records"));
    assert!(text.contains("store 'kb' holds 2 records"));
}

#[test]
fn ingest_reports_per_file_failures_by_name() {
    let ws = workspace();
    std::fs::write(ws.corpus.join("broken.pdf"), "not really a pdf").unwrap();
    PdfBuilder::new()
        .image_only_page()
        .write_to(&ws.corpus.join("scan.pdf"))
        .unwrap();
    let out = ingest(&ws);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(
        text.contains("failed: broken.pdf: MalformedPdf"),
        "got: {text}"
    );
    assert!(
        text.contains("failed: scan.pdf: UnsupportedPdfFeature"),
        "got: {text}"
    );
    assert!(text.contains("2 documents, 2 chunks, 2 records"));
}

#[test]
fn empty_corpus_exits_2_naming_directory() {
    let ws = workspace();
    let empty = ws.corpus.parent().unwrap().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out = bin()
        .args(["ingest", "--store", "kb"])
        .arg("--corpus")
        .arg(&empty)
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(
        err.contains(&format!("Directory '{}' is empty", empty.display())),
        "got: {err}"
    );
}

#[test]
fn invalid_chunk_flags_exit_2_naming_key() {
    let ws = workspace();
    let out = bin()
        .args([
            "ingest",
            "--store",
            "kb",
            "--chunk-max",
            "100",
            "--chunk-overlap",
            "100",
        ])
        .arg("--corpus")
        .arg(&ws.corpus)
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("chunk.overlap"));
}

#[test]
fn repl_exit_is_case_insensitive_with_farewell() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    let mut child = bin()
        .args(["ask", "--store", "kb", "--backend", "offline"])
        .arg("--store-root")
        .arg(&ws.stores)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"solar array kilowatts\nEXIT\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("Enter your question (or type 'exit' to quit):"));
    assert!(text.contains("Based on [0]:"));
    assert!(text.contains("Sources: [0] solar.txt"));
    assert!(text.contains("Exiting the conversation. Goodbye!"));
}

#[test]
fn repl_survives_failed_turns() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    // Config keeps retries at zero so the dead backend fails fast.
    let config = ws.corpus.parent().unwrap().join("ragforge.toml");
    std::fs::write(&config, "[generation]\nmax_retries = 0\ntimeout_s = 2\n").unwrap();

    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let dead = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);

    let mut child = bin()
        .args([
            "ask",
            "--store",
            "kb",
            "--backend",
            "chat",
            "--endpoint",
            &dead,
        ])
        .arg("--config")
        .arg(&config)
        .arg("--store-root")
        .arg(&ws.stores)
        .env("OPENAI_API_KEY", "sk-dummy")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"first question\nexit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    // The failed turn is reported and the loop continues to the farewell.
    assert!(out.status.success());
    assert!(stderr_of(&out).contains("BackendUnavailable"));
    assert!(stdout_of(&out).contains("Exiting the conversation. Goodbye!"));
}

#[test]
fn once_with_dead_backend_exits_1_naming_error() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    let config = ws.corpus.parent().unwrap().join("ragforge.toml");
    std::fs::write(&config, "[generation]\nmax_retries = 0\ntimeout_s = 2\n").unwrap();
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let dead = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);

    let out = bin()
        .args([
            "ask",
            "--store",
            "kb",
            "--backend",
            "chat",
            "--endpoint",
            &dead,
            "--once",
            "q",
        ])
        .arg("--config")
        .arg(&config)
        .arg("--store-root")
        .arg(&ws.stores)
        .env("OPENAI_API_KEY", "sk-dummy")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("BackendUnavailable"));
}

#[test]
fn chat_backend_without_key_exits_2_with_guard_message() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    let cwd = TempDir::new().unwrap(); // guaranteed no .env here
    let out = bin()
        .args(["ask", "--store", "kb", "--backend", "chat", "--once", "q"])
        .arg("--store-root")
        .arg(&ws.stores)
        .current_dir(cwd.path())
        .env_remove("OPENAI_API_KEY")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out)
        .contains("OPENAI_API_KEY is not set in the environment. Please set it in the .env file."));
}

#[test]
fn dotenv_file_supplies_the_key() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    let cwd = TempDir::new().unwrap();
    std::fs::write(cwd.path().join(".env"), "OPENAI_API_KEY=sk-from-dotenv\n").unwrap();
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let dead = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    std::fs::write(
        cwd.path().join("ragforge.toml"),
        "[generation]\nmax_retries = 0\ntimeout_s = 2\n",
    )
    .unwrap();

    // Startup guard passes via .env; the dead endpoint then fails the turn
    // (1), not the missing-key guard (2).
    let out = bin()
        .args([
            "ask",
            "--store",
            "kb",
            "--backend",
            "chat",
            "--endpoint",
            &dead,
            "--once",
            "q",
        ])
        .arg("--store-root")
        .arg(&ws.stores)
        .current_dir(cwd.path())
        .env_remove("OPENAI_API_KEY")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("BackendUnavailable"));
}

#[test]
fn stores_list_and_delete_lifecycle() {
    let ws = workspace();
    let fresh = bin()
        .args(["stores", "list"])
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    assert!(fresh.status.success());
    assert!(stdout_of(&fresh).contains("no stores"));

    assert!(ingest(&ws).status.success());
    let listed = bin()
        .args(["stores", "list"])
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    let text = stdout_of(&listed);
    assert!(text.contains("kb"));
    assert!(text.contains("records=2"));
    assert!(text.contains("embedder=hashbow-256"));

    let deleted = bin()
        .args(["stores", "delete", "kb"])
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    assert!(deleted.status.success());
    let again = bin()
        .args(["stores", "delete", "kb"])
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr_of(&again).contains("NotFound"));
}

#[test]
fn remote_sync_and_ask_against_mock() {
    let mock = AssistantMock::start(AssistantScenario::shipped("completed_with_citation"));
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("Upload");
    std::fs::create_dir_all(&corpus).unwrap();
    PdfBuilder::new()
        .page(&["handbook content"])
        .write_to(&corpus.join("a.pdf"))
        .unwrap();

    let sync = bin()
        .args(["remote", "sync", "--name", "kb", "--endpoint", &mock.url()])
        .arg("--corpus")
        .arg(&corpus)
        .output()
        .unwrap();
    assert!(sync.status.success(), "stderr: {}", stderr_of(&sync));
    let text = stdout_of(&sync);
    assert!(text.contains("vector store: vs-"), "got {text}");
    assert!(text.contains("assistant: asst-"));

    let ask = bin()
        .args([
            "remote",
            "ask",
            "--name",
            "kb",
            "--endpoint",
            &mock.url(),
            "--question",
            "what is the retention policy?",
            "--poll-interval",
            "0",
        ])
        .arg("--corpus")
        .arg(&corpus)
        .output()
        .unwrap();
    assert!(ask.status.success(), "stderr: {}", stderr_of(&ask));
    let text = stdout_of(&ask);
    assert!(
        text.contains("The retention policy is ninety days[0]"),
        "got {text}"
    );
    assert!(text.contains("Sources: [0] a.pdf"));

    // Sync then ask reused the same store: exactly one create happened.
    let creates = mock
        .requests()
        .iter()
        .filter(|r| r.method == "POST" && r.path == "/v1/vector_stores")
        .count();
    assert_eq!(creates, 1);
}

#[test]
fn remote_without_endpoint_is_usage_error() {
    let out = bin()
        .args(["remote", "sync", "--name", "kb"])
        .current_dir(TempDir::new().unwrap().path())
        .env_remove("RAGFORGE_REMOTE_ENDPOINT")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("remote.endpoint"));
}

#[test]
fn env_overrides_select_store_root() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    // Same command without --store-root, pointed via environment.
    let out = bin()
        .args(["stores", "list"])
        .env("RAGFORGE_STORE_ROOT", &ws.stores)
        .current_dir(TempDir::new().unwrap().path())
        .output()
        .unwrap();
    assert!(stdout_of(&out).contains("kb"));
}

#[test]
fn custom_template_file_is_honored() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    let template = ws.corpus.parent().unwrap().join("custom.txt");
    std::fs::write(&template, "CUSTOM HEAD\n\nCtx: {context}\nQ: {question}\n").unwrap();
    let out = bin()
        .args([
            "ask",
            "--store",
            "kb",
            "--backend",
            "offline",
            "--once",
            "solar array",
        ])
        .arg("--template")
        .arg(&template)
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    // Offline echo still reads block 0 from the filled template's context.
    assert!(stdout_of(&out).contains("Based on [0]:"));

    let bad = ws.corpus.parent().unwrap().join("bad.txt");
    std::fs::write(&bad, "no slots at all").unwrap();
    let out = bin()
        .args([
            "ask",
            "--store",
            "kb",
            "--backend",
            "offline",
            "--once",
            "q",
        ])
        .arg("--template")
        .arg(&bad)
        .arg("--store-root")
        .arg(&ws.stores)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("template"));
}

#[test]
fn k_flag_limits_citations_and_config_file_supplies_store() {
    let ws = workspace();
    assert!(ingest(&ws).status.success());
    let config = ws.corpus.parent().unwrap().join("ragforge.toml");
    std::fs::write(
        &config,
        format!(
            "[store]\nname = \"kb\"\nroot = \"{}\"\n[retrieve]\nk = 1\n",
            ws.stores.display()
        ),
    )
    .unwrap();

    // Store name and root come from the file; k=1 keeps a single citation.
    let out = bin()
        .args(["ask", "--backend", "offline", "--once", "solar array kilowatts noon"])
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("Sources: [0] solar.txt"), "got {text}");
    assert!(!text.contains("[1]"), "k=1 must yield a single source: {text}");

    // The --k flag overrides the file.
    let out = bin()
        .args(["ask", "--backend", "offline", "--k", "2", "--once", "solar array kilowatts noon"])
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(stdout_of(&out).contains("[1] generator.txt"));
}
