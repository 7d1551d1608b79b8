//! Shared blocking HTTP plumbing for the remote backends.

use std::time::Duration;

use serde_json::Value;

/// Transport-level failure, before any protocol interpretation.
#[derive(Debug)]
pub(crate) enum HttpFailure {
    Timeout,
    /// Connection refused / host unreachable.
    Unavailable(String),
    Other(String),
}

pub(crate) struct HttpClient {
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build();
        Self {
            agent: config.new_agent(),
        }
    }

    /// POST a JSON body; returns (status, body text) for any HTTP status.
    pub fn post_json(
        &self,
        url: &str,
        headers: &[(&str, &str)],
        body: &Value,
    ) -> Result<(u16, String), HttpFailure> {
        let mut req = self.agent.post(url);
        for (k, v) in headers {
            req = req.header(*k, *v);
        }
        let resp = req.send_json(body).map_err(classify)?;
        read_response(resp)
    }

    /// POST raw bytes (used for file uploads).
    pub fn post_bytes(
        &self,
        url: &str,
        headers: &[(&str, &str)],
        body: &[u8],
    ) -> Result<(u16, String), HttpFailure> {
        let mut req = self.agent.post(url);
        for (k, v) in headers {
            req = req.header(*k, *v);
        }
        let resp = req.send(body).map_err(classify)?;
        read_response(resp)
    }

    pub fn get(&self, url: &str, headers: &[(&str, &str)]) -> Result<(u16, String), HttpFailure> {
        let mut req = self.agent.get(url);
        for (k, v) in headers {
            req = req.header(*k, *v);
        }
        let resp = req.call().map_err(classify)?;
        read_response(resp)
    }
}

fn read_response(mut resp: ureq::http::Response<ureq::Body>) -> Result<(u16, String), HttpFailure> {
    let status = resp.status().as_u16();
    let text = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| HttpFailure::Other(format!("reading response body: {e}")))?;
    Ok((status, text))
}

fn classify(err: ureq::Error) -> HttpFailure {
    match err {
        ureq::Error::Timeout(_) => HttpFailure::Timeout,
        ureq::Error::ConnectionFailed | ureq::Error::HostNotFound => {
            HttpFailure::Unavailable(err.to_string())
        }
        ureq::Error::Io(ref io) if io.kind() == std::io::ErrorKind::ConnectionRefused => {
            HttpFailure::Unavailable(err.to_string())
        }
        ureq::Error::Io(ref io) if io.kind() == std::io::ErrorKind::TimedOut => {
            HttpFailure::Timeout
        }
        other => HttpFailure::Other(other.to_string()),
    }
}

/// First `limit` characters of a response body, for error messages.
pub(crate) fn excerpt(body: &str, limit: usize) -> String {
    if body.chars().count() <= limit {
        body.to_string()
    } else {
        let cut: String = body.chars().take(limit).collect();
        format!("{cut}…")
    }
}
