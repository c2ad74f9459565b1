//! Uniform access to chat-completion models and to HomeAssistant.
//!
//! Every model is reached through one OpenAI-style dialect; replay and mock
//! providers make runs reproducible without network access.

mod embedding;
mod error;
mod homeassistant;
mod http;
mod mock;
mod replay;
mod types;

use async_trait::async_trait;

pub use embedding::{EmbeddingTable, HttpEmbeddingClient};
pub use error::{GatewayError, HaError};
pub use homeassistant::{HaClient, HaEndpoint, MonotonicIds, DEFAULT_PATH_TEMPLATE};
pub use http::HttpProvider;
pub use mock::{FailingProvider, MockProvider, ALWAYS_VALID_REPLY};
pub use replay::{fixture_path, load_replay_store, write_fixture, ReplayEntry, ReplayProvider};
pub use types::{LlmRequest, LlmResponse, ProviderConfig, Secret};

/// A chat-completion backend. Implementations are shareable handles.
#[async_trait]
pub trait Provider: Send + Sync {
    async fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, GatewayError>;

    fn name(&self) -> &str;
}

/// Send `request` to `provider`.
pub async fn complete(provider: &dyn Provider, request: &LlmRequest) -> Result<LlmResponse, GatewayError> {
    provider.complete(request).await
}
