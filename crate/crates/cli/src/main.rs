//! ragforge command line: corpus ingestion, index building, store
//! management, interactive question answering and the remote managed
//! assistant flow.
//!
//! Exit codes are stable for scripting: 0 success, 1 operational error,
//! 2 usage/config error. Typed errors print as `error: <message>`; no
//! command surfaces a stack trace.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;

#[derive(Parser)]
#[command(
    name = "ragforge",
    version,
    about = "PDF-grounded retrieval-augmented generation"
)]
struct Cli {
    /// Config file (default: ./ragforge.toml when present)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a corpus directory into a named vector store
    Ingest(IngestArgs),
    /// Ask questions against a store (interactive unless --once)
    Ask(AskArgs),
    /// Manage local vector stores
    Stores(StoresArgs),
    /// Drive a remote managed assistant with file search
    Remote(RemoteArgs),
}

#[derive(Args)]
pub(crate) struct IngestArgs {
    /// Corpus directory with .txt/.pdf files
    #[arg(long, value_name = "DIR")]
    corpus: Option<PathBuf>,
    /// Vector store name
    #[arg(long, value_name = "NAME")]
    store: Option<String>,
    /// Root directory holding stores
    #[arg(long, value_name = "DIR")]
    store_root: Option<PathBuf>,
    /// Maximum tokens per chunk
    #[arg(long, value_name = "N")]
    chunk_max: Option<usize>,
    /// Overlapping tokens between consecutive chunks
    #[arg(long, value_name = "N")]
    chunk_overlap: Option<usize>,
    /// Chunking mode: fixed or semantic
    #[arg(long, value_name = "MODE")]
    chunk_mode: Option<String>,
    /// Embedding dimension (reference embedder)
    #[arg(long, value_name = "D")]
    dimension: Option<usize>,
}

#[derive(Args)]
pub(crate) struct AskArgs {
    /// Vector store name
    #[arg(long, value_name = "NAME")]
    store: Option<String>,
    /// Root directory holding stores
    #[arg(long, value_name = "DIR")]
    store_root: Option<PathBuf>,
    /// Number of chunks to retrieve
    #[arg(long, value_name = "K")]
    k: Option<usize>,
    /// Minimum similarity score for retrieved chunks
    #[arg(long, value_name = "S")]
    min_score: Option<f64>,
    /// Generation backend: chat, local or offline
    #[arg(long, value_name = "BACKEND")]
    backend: Option<String>,
    /// Model name for the selected backend
    #[arg(long, value_name = "MODEL")]
    model: Option<String>,
    /// Sampling temperature
    #[arg(long, value_name = "T")]
    temperature: Option<f64>,
    /// Nucleus sampling parameter
    #[arg(long, value_name = "P")]
    top_p: Option<f64>,
    /// Backend endpoint URL
    #[arg(long, value_name = "URL")]
    endpoint: Option<String>,
    /// Prompt template file with {context} and {question} slots
    #[arg(long, value_name = "PATH")]
    template: Option<PathBuf>,
    /// Answer a single question non-interactively
    #[arg(long, value_name = "QUESTION")]
    once: Option<String>,
    /// Print answers word by word
    #[arg(long)]
    typewriter: bool,
}

#[derive(Args)]
pub(crate) struct StoresArgs {
    #[command(subcommand)]
    action: StoresAction,
    /// Root directory holding stores
    #[arg(long, global = true, value_name = "DIR")]
    store_root: Option<PathBuf>,
}

#[derive(Subcommand)]
pub(crate) enum StoresAction {
    /// List store manifests
    List,
    /// Delete a store by name
    Delete { name: String },
}

#[derive(Args)]
pub(crate) struct RemoteArgs {
    #[command(subcommand)]
    action: RemoteAction,
    /// Managed service endpoint URL
    #[arg(long, global = true, value_name = "URL")]
    endpoint: Option<String>,
    /// Remote vector store name
    #[arg(long, global = true, value_name = "NAME")]
    name: Option<String>,
    /// Corpus directory with PDFs to upload on store creation
    #[arg(long, global = true, value_name = "DIR")]
    corpus: Option<PathBuf>,
    /// Assistant name for get-or-create
    #[arg(long, global = true, value_name = "NAME")]
    assistant_name: Option<String>,
}

#[derive(Subcommand)]
pub(crate) enum RemoteAction {
    /// Ensure the vector store (uploading PDFs on creation) and assistant
    Sync,
    /// Ask one question through the managed assistant
    Ask {
        #[arg(long, value_name = "QUESTION")]
        question: String,
        /// Seconds between run status polls
        #[arg(long, value_name = "S", default_value_t = 1.0)]
        poll_interval: f64,
        /// Maximum number of status polls before timing out
        #[arg(long, value_name = "N", default_value_t = 120)]
        max_polls: u32,
    },
}

/// Command failure carrying the process exit code.
pub(crate) struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn operational(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 1,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = match Settings::load(cli.config.as_deref()) {
        Ok(settings) => settings,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let result = match cli.command {
        Command::Ingest(args) => commands::ingest::run(settings, args),
        Command::Ask(args) => commands::ask::run(settings, args),
        Command::Stores(args) => commands::stores::run(settings, args),
        Command::Remote(args) => commands::remote::run(settings, args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
