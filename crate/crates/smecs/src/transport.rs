//! HTTP transports: recorded fixtures for offline runs, ureq for the network.

use std::collections::BTreeMap;
use std::fs;
use std::io::ErrorKind;
use std::path::{Component, Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;
use serde_json::Value;
use smecs_core::{HttpRequest, HttpResponse, HttpTransport, TransportFailure};

/// One recorded response.
///
/// `body` holds a JSON payload, `body_text` a raw one. `transport_error`
/// simulates a failure below HTTP.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Recorded {
    #[serde(default = "ok")]
    status: u16,
    #[serde(default)]
    headers: BTreeMap<String, String>,
    #[serde(default)]
    body: Option<Value>,
    #[serde(default)]
    body_text: Option<String>,
    #[serde(default)]
    transport_error: Option<String>,
}

fn ok() -> u16 {
    200
}

/// Replays responses stored as `<root>/<request path>.json`.
///
/// A request path without a recording gets a 404, as the API would answer
/// for a missing repository or file.
#[derive(Debug)]
pub struct FixtureTransport {
    root: PathBuf,
    seen: Mutex<Vec<HttpRequest>>,
}

impl FixtureTransport {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureTransport { root: root.into(), seen: Mutex::new(Vec::new()) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Requests received so far.
    pub fn requests(&self) -> Vec<HttpRequest> {
        self.seen.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn file_for(&self, path: &str) -> Option<PathBuf> {
        let rel = Path::new(path.trim_start_matches('/'));
        if rel.as_os_str().is_empty() || !rel.components().all(|c| matches!(c, Component::Normal(_))) {
            return None;
        }
        let mut file = self.root.join(rel).into_os_string();
        file.push(".json");
        Some(file.into())
    }
}

fn not_found() -> HttpResponse {
    HttpResponse { status: 404, headers: Vec::new(), body: r#"{"message":"Not Found"}"#.into() }
}

impl HttpTransport for FixtureTransport {
    fn get(&self, request: &HttpRequest) -> Result<HttpResponse, TransportFailure> {
        self.seen.lock().unwrap_or_else(|e| e.into_inner()).push(request.clone());
        let Some(file) = self.file_for(&request.path) else {
            return Ok(not_found());
        };
        let text = match fs::read_to_string(&file) {
            Ok(text) => text,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(not_found()),
            Err(e) => return Err(TransportFailure(format!("fixture {}: {e}", file.display()))),
        };
        let recorded: Recorded =
            serde_json::from_str(&text).map_err(|e| TransportFailure(format!("fixture {}: {e}", file.display())))?;
        if let Some(message) = recorded.transport_error {
            return Err(TransportFailure(message));
        }
        let body = match (recorded.body, recorded.body_text) {
            (_, Some(text)) => text,
            (Some(value), None) => value.to_string(),
            (None, None) => String::new(),
        };
        Ok(HttpResponse { status: recorded.status, headers: recorded.headers.into_iter().collect(), body })
    }
}

/// Blocking client for the real API.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .user_agent(concat!("smecs/", env!("CARGO_PKG_VERSION")))
            .build();
        UreqTransport { agent: config.into() }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        UreqTransport::new(Duration::from_secs(30))
    }
}

impl HttpTransport for UreqTransport {
    fn get(&self, request: &HttpRequest) -> Result<HttpResponse, TransportFailure> {
        let mut call = self.agent.get(&request.url);
        for (name, value) in &request.headers {
            call = call.header(name, value);
        }
        // ureq errors name the URL at most; headers stay out of them.
        let mut response = call.call().map_err(|e| TransportFailure(e.to_string()))?;
        let headers = response
            .headers()
            .iter()
            .filter_map(|(k, v)| Some((k.as_str().to_string(), v.to_str().ok()?.to_string())))
            .collect();
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .with_config()
            .limit(32 * 1024 * 1024)
            .read_to_string()
            .map_err(|e| TransportFailure(e.to_string()))?;
        Ok(HttpResponse { status, headers, body })
    }
}
