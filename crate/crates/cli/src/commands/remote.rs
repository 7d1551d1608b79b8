//! `ragforge remote`: drive the managed assistant/file-search service.

use std::path::Path;
use std::time::Duration;

use ragforge::generation::api_key_from_env_or_dotenv;
use ragforge::remote_assistant::{
    AssistantProfile, PollConfig, RemoteAssistantClient, RemoteAssistantError,
};

use crate::commands::{operational, remote_error_name};
use crate::config::Settings;
use crate::{CliError, RemoteAction, RemoteArgs};

pub fn run(mut settings: Settings, args: RemoteArgs) -> Result<(), CliError> {
    if let Some(endpoint) = args.endpoint {
        settings.remote_endpoint = Some(endpoint);
    }
    if let Some(name) = args.name {
        settings.store_name = Some(name);
    }
    if let Some(dir) = args.corpus {
        settings.corpus_dir = dir;
    }
    if let Some(name) = args.assistant_name {
        settings.remote_assistant_name = name;
    }

    let endpoint = settings.remote_endpoint.clone().ok_or_else(|| {
        CliError::usage(
            "remote.endpoint is not set: pass --endpoint or set [remote] endpoint in ragforge.toml",
        )
    })?;
    let store_name = settings
        .require_store_name()
        .map_err(|e| CliError::usage(e.0))?
        .to_string();
    let api_key = api_key_from_env_or_dotenv(Path::new(".env"));
    let client = RemoteAssistantClient::new(endpoint, api_key);
    let profile = AssistantProfile::new(settings.remote_assistant_name.clone());

    match args.action {
        RemoteAction::Sync => {
            let vs_id = ensure_store(&client, &store_name, &settings)?;
            let asst_id = client
                .ensure_assistant(&profile, &vs_id)
                .map_err(|e| operational(remote_error_name(&e), e))?;
            println!("vector store: {vs_id}");
            println!("assistant: {asst_id}");
            Ok(())
        }
        RemoteAction::Ask {
            question,
            poll_interval,
            max_polls,
        } => {
            let vs_id = ensure_store(&client, &store_name, &settings)?;
            let asst_id = client
                .ensure_assistant(&profile, &vs_id)
                .map_err(|e| operational(remote_error_name(&e), e))?;
            let thread_id = client
                .create_thread(&vs_id)
                .map_err(|e| operational(remote_error_name(&e), e))?;
            let poll = PollConfig {
                interval: Duration::from_secs_f64(poll_interval.max(0.0)),
                max_polls,
            };
            let answer = client
                .ask_remote(&thread_id, &asst_id, &question, poll)
                .map_err(|e| operational(remote_error_name(&e), e))?;
            println!("{}", answer.text);
            if !answer.citations.is_empty() {
                println!();
                println!("Sources: {}", answer.citations.join(", "));
            }
            Ok(())
        }
    }
}

fn ensure_store(
    client: &RemoteAssistantClient,
    name: &str,
    settings: &Settings,
) -> Result<String, CliError> {
    client
        .ensure_vector_store(name, &settings.corpus_dir)
        .map_err(|e| match e {
            RemoteAssistantError::EmptyName
            | RemoteAssistantError::DirNotFound(_)
            | RemoteAssistantError::EmptyDirectory(_)
            | RemoteAssistantError::NoPdfFiles(_) => CliError::usage(e.to_string()),
            other => operational(remote_error_name(&other), other),
        })
}
