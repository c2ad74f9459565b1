//! Embedding-based similarity through an HTTP embeddings endpoint.
//!
//! Embeddings are fetched asynchronously up front and then served from
//! memory, so the synchronous similarity interface stays pure.

use std::collections::HashMap;

use ecomate_core::analysis::{normalize_for_similarity, EmbeddingProvider};
use serde_json::{json, Value};

use crate::{GatewayError, ProviderConfig};

/// Client for an OpenAI-style `/embeddings` endpoint.
#[derive(Debug, Clone)]
pub struct HttpEmbeddingClient {
    config: ProviderConfig,
    model: String,
    client: reqwest::Client,
}

impl HttpEmbeddingClient {
    pub fn new(config: ProviderConfig, model: impl Into<String>) -> Result<Self, GatewayError> {
        config.validate()?;
        let client = reqwest::Client::builder()
            .timeout(std::time::Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self {
            config,
            model: model.into(),
            client,
        })
    }

    pub async fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        let mut builder = self
            .client
            .post(&self.config.endpoint_url)
            .json(&json!({"model": self.model, "input": texts}));
        if !self.config.auth_token.is_empty() {
            builder = builder.bearer_auth(self.config.auth_token.expose());
        }
        let response = builder
            .send()
            .await
            .map_err(|e| GatewayError::Transport(e.without_url().to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .text()
            .await
            .map_err(|e| GatewayError::Transport(e.without_url().to_string()))?;
        if status != 200 {
            return Err(GatewayError::Http { status, body });
        }
        let value: Value = serde_json::from_str(&body).map_err(|e| GatewayError::BadResponse(e.to_string()))?;
        let data = value
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| GatewayError::BadResponse("missing data".into()))?;
        data.iter()
            .map(|item| {
                item.get("embedding")
                    .and_then(Value::as_array)
                    .map(|v| v.iter().filter_map(Value::as_f64).collect())
                    .ok_or_else(|| GatewayError::BadResponse("missing embedding".into()))
            })
            .collect()
    }

    /// Embed every text (after similarity normalization) and return a
    /// table usable as an [`EmbeddingProvider`].
    pub async fn precompute(&self, texts: impl IntoIterator<Item = String>) -> Result<EmbeddingTable, GatewayError> {
        let mut keys: Vec<String> = texts.into_iter().map(|t| normalize_for_similarity(&t)).collect();
        keys.sort();
        keys.dedup();
        let vectors = self.embed(&keys).await?;
        if vectors.len() != keys.len() {
            return Err(GatewayError::BadResponse("embedding count mismatch".into()));
        }
        Ok(EmbeddingTable {
            name: format!("embeddings:{}", self.model),
            vectors: keys.into_iter().zip(vectors).collect(),
        })
    }
}

/// Precomputed embeddings keyed by normalized text. Unknown texts embed to
/// the empty vector, which scores 0 against anything.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    name: String,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingProvider for EmbeddingTable {
    fn embed(&self, text: &str) -> Vec<f64> {
        self.vectors
            .get(&normalize_for_similarity(text))
            .cloned()
            .unwrap_or_default()
    }

    fn name(&self) -> &str {
        &self.name
    }
}
