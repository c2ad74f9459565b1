//! Live submission of automations to a HomeAssistant instance.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use ecomate_core::validate::{ValidationOutcome, ValidationStatus};
use serde::Deserialize;
use tokio::sync::Mutex;

use crate::{HaError, Secret};

pub const DEFAULT_PATH_TEMPLATE: &str = "/api/config/automation/config/{id}";

#[derive(Debug, Clone, Deserialize)]
pub struct HaEndpoint {
    pub base_url: String,
    pub token: Secret,
    #[serde(default = "default_path_template")]
    pub path_template: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_path_template() -> String {
    DEFAULT_PATH_TEMPLATE.to_string()
}

fn default_timeout_ms() -> u64 {
    10_000
}

impl HaEndpoint {
    pub fn new(base_url: impl Into<String>, token: Secret) -> Self {
        Self {
            base_url: base_url.into(),
            token,
            path_template: default_path_template(),
            timeout_ms: default_timeout_ms(),
        }
    }

    pub fn url_for(&self, id: &str) -> Result<url::Url, HaError> {
        let base = url::Url::parse(&self.base_url).map_err(|e| HaError::Config(e.to_string()))?;
        let path = self.path_template.replace("{id}", id);
        base.join(&path).map_err(|e| HaError::Config(e.to_string()))
    }
}

/// Strictly increasing millisecond timestamps rendered as strings.
#[derive(Debug, Default)]
pub struct MonotonicIds {
    last: AtomicU64,
}

impl MonotonicIds {
    pub fn next(&self) -> String {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or_default();
        let mut prev = self.last.load(Ordering::Relaxed);
        loop {
            let candidate = now.max(prev + 1);
            match self
                .last
                .compare_exchange_weak(prev, candidate, Ordering::AcqRel, Ordering::Relaxed)
            {
                Ok(_) => return candidate.to_string(),
                Err(actual) => prev = actual,
            }
        }
    }
}

#[derive(Deserialize)]
struct ServerMessage {
    message: String,
}

/// Shareable HomeAssistant client. Concurrent submissions are allowed, but
/// writes to the same base URL go through one at a time.
#[derive(Clone)]
pub struct HaClient {
    client: reqwest::Client,
    ids: Arc<MonotonicIds>,
    locks: Arc<StdMutex<HashMap<String, Arc<Mutex<()>>>>>,
}

impl Default for HaClient {
    fn default() -> Self {
        Self::new()
    }
}

impl HaClient {
    pub fn new() -> Self {
        Self {
            client: reqwest::Client::new(),
            ids: Arc::new(MonotonicIds::default()),
            locks: Arc::default(),
        }
    }

    fn endpoint_lock(&self, base: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(base.to_string()).or_default().clone()
    }

    pub fn next_id(&self) -> String {
        self.ids.next()
    }

    /// Submit with a freshly generated automation id.
    pub async fn submit_live(&self, json_text: &str, endpoint: &HaEndpoint) -> Result<ValidationOutcome, HaError> {
        let id = self.next_id();
        self.submit_with_id(json_text, endpoint, &id).await
    }

    /// POST the automation body verbatim and map the reply: 200 is Valid,
    /// 400 carries the server's message, 401/403 is Unauthorized.
    pub async fn submit_with_id(
        &self,
        json_text: &str,
        endpoint: &HaEndpoint,
        id: &str,
    ) -> Result<ValidationOutcome, HaError> {
        let url = endpoint.url_for(id)?;
        let lock = self.endpoint_lock(&endpoint.base_url);
        let _guard = lock.lock().await;

        let response = self
            .client
            .post(url)
            .bearer_auth(endpoint.token.expose())
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .timeout(Duration::from_millis(endpoint.timeout_ms))
            .body(json_text.to_string())
            .send()
            .await
            .map_err(|e| HaError::Unreachable(e.without_url().to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .text()
            .await
            .map_err(|e| HaError::Unreachable(e.without_url().to_string()))?;
        match status {
            200 => Ok(ValidationOutcome::valid()),
            400 => {
                let message = serde_json::from_str::<ServerMessage>(&body)
                    .map(|m| m.message)
                    .unwrap_or(body);
                let mut outcome = ValidationOutcome::from_server_message(&message);
                if outcome.status == ValidationStatus::Valid {
                    outcome.status = ValidationStatus::Malformed;
                }
                Ok(outcome)
            }
            401 | 403 => Err(HaError::Unauthorized(status)),
            _ => Err(HaError::Unexpected { status, body }),
        }
    }
}
