//! EcoMate HTTP service: a chat assistant that turns requests into
//! HomeAssistant routines, plus appliance, routine and settings management.
//!
//! Everything under `/api` requires the bearer token and every API response
//! body is scrubbed of known secrets before it leaves the process.

pub mod api;
pub mod chat;
pub mod config;
pub mod error;
pub mod routine;
pub mod settings;
pub mod store;

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex as StdMutex};

use axum::body::Body as HttpBody;
use axum::extract::{Request, State};
use axum::http::header::{AUTHORIZATION, CONTENT_LENGTH};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use ecomate_gateway::{HaClient, MonotonicIds, Provider, Secret};
use tokio::sync::Mutex;
use tower_http::services::{ServeDir, ServeFile};

pub use error::ApiError;
pub use store::{Document, Store, StoreError};

/// Conversation starters shown above the chat box.
pub const DEFAULT_STARTERS: [&str; 4] = [
    "How much does my TV consume?",
    "What are some green energy practices I can adopt at home?",
    "Create a routine to turn the lights off at sunset",
    "Help me use the air conditioner more efficiently",
];

/// Where chat completions come from.
#[derive(Clone)]
pub enum ProviderSource {
    /// An HTTP endpoint built from the stored settings on every turn.
    Settings,
    /// A fixed provider, for offline demos and tests.
    Fixed(Arc<dyn Provider>),
}

/// Named async locks created on first use.
#[derive(Default)]
pub struct KeyedLocks(StdMutex<HashMap<String, Arc<Mutex<()>>>>);

impl KeyedLocks {
    pub fn get(&self, key: &str) -> Arc<Mutex<()>> {
        let mut map = self.0.lock().expect("lock table poisoned");
        map.entry(key.to_string()).or_default().clone()
    }
}

pub struct Inner {
    pub store: Store,
    pub provider: ProviderSource,
    pub ha: HaClient,
    pub api_token: Secret,
    /// Model token from the environment, used when settings hold none.
    pub provider_token: Secret,
    pub starters: Vec<String>,
    pub locks: KeyedLocks,
    pub ids: MonotonicIds,
}

#[derive(Clone)]
pub struct AppState {
    pub inner: Arc<Inner>,
}

impl AppState {
    pub fn new(store: Store, api_token: Secret) -> Self {
        Self::build(store, api_token, ProviderSource::Settings, Secret::default(), default_starters())
    }

    pub fn build(
        store: Store,
        api_token: Secret,
        provider: ProviderSource,
        provider_token: Secret,
        starters: Vec<String>,
    ) -> Self {
        Self {
            inner: Arc::new(Inner {
                store,
                provider,
                ha: HaClient::new(),
                api_token,
                provider_token,
                starters,
                locks: KeyedLocks::default(),
                ids: MonotonicIds::default(),
            }),
        }
    }

    /// Every secret the service knows of right now.
    async fn secrets(&self) -> Vec<Secret> {
        let mut all = vec![self.inner.api_token.clone(), self.inner.provider_token.clone()];
        self.inner
            .store
            .read(|d| all.extend(d.settings.secrets().cloned()))
            .await;
        all.retain(|s| !s.is_empty());
        all.sort_by_key(|s| std::cmp::Reverse(s.expose().len()));
        all
    }
}

pub fn default_starters() -> Vec<String> {
    DEFAULT_STARTERS.iter().map(|s| s.to_string()).collect()
}

/// Replace every occurrence of a secret with its redacted form.
pub fn scrub(text: &str, secrets: &[Secret]) -> String {
    secrets
        .iter()
        .fold(text.to_string(), |acc, s| acc.replace(s.expose(), &s.redacted()))
}

fn token_matches(header: Option<&str>, expected: &Secret) -> bool {
    let Some(given) = header.and_then(|h| h.strip_prefix("Bearer ")) else {
        return false;
    };
    let (a, b) = (given.as_bytes(), expected.expose().as_bytes());
    // length is not secret; the comparison of contents runs in full
    a.len() == b.len() && !b.is_empty() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

async fn require_token(State(state): State<AppState>, request: Request, next: Next) -> Response {
    let header = request.headers().get(AUTHORIZATION).and_then(|v| v.to_str().ok());
    if !token_matches(header, &state.inner.api_token) {
        return ApiError::Unauthorized.into_response();
    }
    next.run(request).await
}

async fn redact_secrets(State(state): State<AppState>, request: Request, next: Next) -> Response {
    let method = request.method().clone();
    let path = request.uri().path().to_string();
    let response = next.run(request).await;
    let (mut parts, body) = response.into_parts();
    let bytes = match axum::body::to_bytes(body, usize::MAX).await {
        Ok(b) => b,
        Err(_) => return ApiError::Store("response body unreadable".into()).into_response(),
    };
    let secrets = state.secrets().await;
    let text = scrub(&String::from_utf8_lossy(&bytes), &secrets);
    if parts.status.is_server_error() {
        tracing::warn!(%method, %path, status = parts.status.as_u16(), body = %text, "request failed");
    } else {
        tracing::debug!(%method, %path, status = parts.status.as_u16(), "request");
    }
    parts.headers.remove(CONTENT_LENGTH);
    Response::from_parts(parts, HttpBody::from(text))
}

/// The full application: `/api` routes behind auth and redaction, plus the
/// UI bundle from `static_dir` when given.
pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/chat", post(api::post_chat))
        .route("/sessions/{id}", get(api::get_session))
        .route("/appliances", get(api::list_appliances).post(api::create_appliance))
        .route(
            "/appliances/{id}",
            get(api::get_appliance)
                .put(api::update_appliance)
                .delete(api::delete_appliance),
        )
        .route("/rooms", get(api::list_rooms))
        .route("/routines", get(api::list_routines))
        .route("/routines/{id}", get(api::get_routine).delete(api::delete_routine))
        .route("/routines/{id}/save", post(api::save_routine))
        .route("/routines/{id}/submit", post(api::submit_routine))
        .route("/settings", get(api::get_settings).put(api::put_settings))
        .route("/starters", get(api::get_starters))
        .fallback(api::api_not_found)
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token))
        .layer(middleware::from_fn_with_state(state.clone(), redact_secrets))
        .with_state(state);

    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => {
            let index = ServeFile::new(dir.join("index.html"));
            app.fallback_service(ServeDir::new(dir).fallback(index))
        }
        None => app,
    }
}
