//! HTTP generation backends and the retry loop.
//!
//! Chat-completions contract: `POST {endpoint}/v1/chat/completions` with
//! `{"model", "messages", "temperature", "top_p"}` and a bearer token from
//! `OPENAI_API_KEY`; the answer is `choices[0].message.content`.
//! Local-model contract: `POST {endpoint}/api/generate` with
//! `{"model", "prompt", "stream": false}`; the answer is the `response`
//! field.

use std::path::Path;
use std::time::Duration;

use serde_json::{json, Value};

use crate::net::{excerpt, HttpClient, HttpFailure};
use crate::retrieval::PromptBundle;

use super::{GenerationConfig, GenerationError};

pub(super) fn chat_completions(
    bundle: &PromptBundle,
    cfg: &GenerationConfig,
) -> Result<String, GenerationError> {
    let api_key = match &cfg.api_key {
        Some(key) => key.clone(),
        None => {
            api_key_from_env_or_dotenv(Path::new(".env")).ok_or(GenerationError::MissingApiKey)?
        }
    };

    let mut messages = Vec::new();
    if !bundle.system_instructions.is_empty() {
        messages.push(json!({"role": "system", "content": bundle.system_instructions}));
    }
    messages.push(json!({"role": "user", "content": bundle.user_message()}));
    let body = json!({
        "model": cfg.model_name,
        "messages": messages,
        "temperature": cfg.temperature,
        "top_p": cfg.top_p,
    });

    let url = format!("{}/v1/chat/completions", cfg.endpoint.trim_end_matches('/'));
    let auth = format!("Bearer {api_key}");
    let response = with_retries(cfg, |client| {
        post_expect_200(client, &url, &[("authorization", auth.as_str())], &body)
    })?;
    response
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| {
            GenerationError::InvalidResponse("missing choices[0].message.content".into())
        })
}

pub(super) fn local_model(
    bundle: &PromptBundle,
    cfg: &GenerationConfig,
) -> Result<String, GenerationError> {
    let body = json!({
        "model": cfg.model_name,
        "prompt": bundle.rendered,
        "stream": false,
    });
    let url = format!("{}/api/generate", cfg.endpoint.trim_end_matches('/'));
    let response = with_retries(cfg, |client| post_expect_200(client, &url, &[], &body))?;
    response
        .get("response")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| GenerationError::InvalidResponse("missing 'response' field".into()))
}

fn post_expect_200(
    client: &HttpClient,
    url: &str,
    headers: &[(&str, &str)],
    body: &Value,
) -> Result<Value, GenerationError> {
    let (status, text) = client.post_json(url, headers, body).map_err(|f| match f {
        HttpFailure::Timeout => GenerationError::Timeout,
        HttpFailure::Unavailable(msg) => GenerationError::BackendUnavailable(msg),
        HttpFailure::Other(msg) => GenerationError::InvalidResponse(msg),
    })?;
    if status != 200 {
        return Err(GenerationError::HttpError {
            status,
            body: excerpt(&text, 200),
        });
    }
    serde_json::from_str(&text)
        .map_err(|e| GenerationError::InvalidResponse(format!("bad JSON: {e}")))
}

/// Run `attempt` up to `max_retries + 1` times, sleeping
/// 0.5 s · 2^attempt between failures. Only transport and HTTP-status
/// failures are retried.
fn with_retries<T>(
    cfg: &GenerationConfig,
    attempt: impl Fn(&HttpClient) -> Result<T, GenerationError>,
) -> Result<T, GenerationError> {
    let client = HttpClient::new(Duration::from_secs(cfg.timeout_s));
    let mut last_err = None;
    for round in 0..=cfg.max_retries {
        match attempt(&client) {
            Ok(value) => return Ok(value),
            Err(err) => {
                let retryable = matches!(
                    err,
                    GenerationError::HttpError { .. }
                        | GenerationError::Timeout
                        | GenerationError::BackendUnavailable(_)
                );
                if !retryable {
                    return Err(err);
                }
                last_err = Some(err);
                if round < cfg.max_retries {
                    std::thread::sleep(Duration::from_millis(500 * (1 << round)));
                }
            }
        }
    }
    Err(last_err.expect("at least one attempt ran"))
}

/// `OPENAI_API_KEY` from the process environment, falling back to a
/// dotenv-style file (`KEY=VALUE` lines, `#` comments, optional quotes).
pub fn api_key_from_env_or_dotenv(dotenv_path: &Path) -> Option<String> {
    if let Ok(key) = std::env::var("OPENAI_API_KEY") {
        if !key.is_empty() {
            return Some(key);
        }
    }
    let contents = std::fs::read_to_string(dotenv_path).ok()?;
    parse_dotenv_value(&contents, "OPENAI_API_KEY")
}

fn parse_dotenv_value(contents: &str, wanted: &str) -> Option<String> {
    for line in contents.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line = line.strip_prefix("export ").unwrap_or(line);
        let (key, value) = line.split_once('=')?;
        if key.trim() == wanted {
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .or_else(|| value.strip_prefix('\'').and_then(|v| v.strip_suffix('\'')))
                .unwrap_or(value);
            if value.is_empty() {
                return None;
            }
            return Some(value.to_string());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotenv_parsing() {
        let contents = "# comment\nOPENAI_API_KEY=sk-test-123\nOTHER=x\n";
        assert_eq!(
            parse_dotenv_value(contents, "OPENAI_API_KEY").as_deref(),
            Some("sk-test-123")
        );
        assert_eq!(
            parse_dotenv_value("OPENAI_API_KEY=\"quoted\"", "OPENAI_API_KEY").as_deref(),
            Some("quoted")
        );
        assert_eq!(
            parse_dotenv_value("export OPENAI_API_KEY=via-export", "OPENAI_API_KEY").as_deref(),
            Some("via-export")
        );
        assert_eq!(
            parse_dotenv_value("OPENAI_API_KEY=", "OPENAI_API_KEY"),
            None
        );
        assert_eq!(
            parse_dotenv_value("# OPENAI_API_KEY=x", "OPENAI_API_KEY"),
            None
        );
    }
}
