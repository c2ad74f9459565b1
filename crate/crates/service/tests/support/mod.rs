#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use ecomate_core::HomeTemplate;
use ecomate_gateway::{GatewayError, LlmRequest, LlmResponse, Provider, Secret};
use ecomate_service::{default_starters, router, AppState, ProviderSource, Store};
use reqwest::{Method, StatusCode};
use serde_json::Value;

pub const API_TOKEN: &str = "api-token-for-tests-7f3a";

pub fn seed() -> HomeTemplate {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/ecomate_seed.json");
    HomeTemplate::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// A routine against the seeded home that passes offline validation.
pub const SUNSET_REPLY: &str = "Good idea! Here is a routine that switches the lights off at sunset.\n```json\n{\"alias\": \"Lights off at sunset\", \"trigger\": [{\"platform\": \"sun\", \"event\": \"sunset\"}], \"action\": [{\"service\": \"light.turn_off\", \"entity_id\": \"light.smart_lights\"}]}\n```\nSwitching lights off when nobody needs them cuts waste.";

/// Replays a scripted list of replies in order, repeating the last one,
/// and keeps every request it saw.
pub struct Scripted {
    replies: Vec<Result<String, GatewayError>>,
    pub seen: Mutex<Vec<LlmRequest>>,
}

impl Scripted {
    pub fn new(replies: impl IntoIterator<Item = Result<String, GatewayError>>) -> Arc<Self> {
        Arc::new(Self {
            replies: replies.into_iter().collect(),
            seen: Mutex::default(),
        })
    }

    pub fn text(reply: &str) -> Arc<Self> {
        Self::new([Ok(reply.to_string())])
    }
}

#[async_trait]
impl Provider for Scripted {
    async fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, GatewayError> {
        let n = {
            let mut seen = self.seen.lock().unwrap();
            seen.push(request.clone());
            seen.len() - 1
        };
        let reply = self.replies[n.min(self.replies.len() - 1)].clone()?;
        Ok(LlmResponse {
            text: reply,
            latency_ms: 1,
            provider_meta: Default::default(),
        })
    }

    fn name(&self) -> &str {
        "scripted"
    }
}

pub struct Server {
    pub base: String,
    pub client: reqwest::Client,
    pub store_path: PathBuf,
    handle: tokio::task::JoinHandle<()>,
}

impl Drop for Server {
    fn drop(&mut self) {
        self.handle.abort();
    }
}

pub async fn spawn(store_path: &Path, provider: Option<Arc<dyn Provider>>) -> Server {
    spawn_with(store_path, provider, None).await
}

pub async fn spawn_with(store_path: &Path, provider: Option<Arc<dyn Provider>>, static_dir: Option<&Path>) -> Server {
    let store = Store::open(store_path, &seed()).unwrap();
    let source = match provider {
        Some(p) => ProviderSource::Fixed(p),
        None => ProviderSource::Settings,
    };
    let state = AppState::build(store, Secret::new(API_TOKEN), source, Secret::default(), default_starters());
    let app = router(state, static_dir);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    Server {
        base: format!("http://{addr}"),
        client: reqwest::Client::new(),
        store_path: store_path.to_path_buf(),
        handle,
    }
}

impl Server {
    /// Authenticated call; returns status and the parsed body (Null when empty).
    pub async fn call(&self, method: Method, path: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (status, text) = self.call_text(method, path, body).await;
        let value = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap() };
        (status, value)
    }

    pub async fn call_text(&self, method: Method, path: &str, body: Option<Value>) -> (StatusCode, String) {
        let mut req = self
            .client
            .request(method, format!("{}{path}", self.base))
            .bearer_auth(API_TOKEN);
        if let Some(body) = body {
            req = req
                .header("content-type", "application/json")
                .body(serde_json::to_vec(&body).unwrap());
        }
        let res = req.send().await.unwrap();
        (res.status(), res.text().await.unwrap())
    }

    pub async fn get(&self, path: &str) -> (StatusCode, Value) {
        self.call(Method::GET, path, None).await
    }

    pub async fn post(&self, path: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, path, Some(body)).await
    }

    pub async fn put(&self, path: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::PUT, path, Some(body)).await
    }

    pub async fn delete(&self, path: &str) -> (StatusCode, Value) {
        self.call(Method::DELETE, path, None).await
    }

    pub async fn chat(&self, session: Option<&str>, message: &str) -> (StatusCode, Value) {
        self.post("/api/chat", serde_json::json!({"session_id": session, "message": message}))
            .await
    }

    /// Settings with a username and an HA endpoint, as a PUT body.
    pub async fn configure(&self, ha_base_url: &str, ha_token: &str) {
        let (status, body) = self
            .put(
                "/api/settings",
                serde_json::json!({
                    "ha_base_url": ha_base_url,
                    "ha_token": ha_token,
                    "username": "Robin",
                    "provider": {"endpoint_url": "", "model_id": "gpt-3.5-turbo", "temperature": 0.7}
                }),
            )
            .await;
        assert_eq!(status, StatusCode::OK, "{body}");
    }
}
