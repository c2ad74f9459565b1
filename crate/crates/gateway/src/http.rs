//! OpenAI-style chat-completions client.

use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde_json::{json, Value};
use tokio::sync::Semaphore;

use crate::{GatewayError, LlmRequest, LlmResponse, Provider, ProviderConfig};

/// Chat-completions over HTTP with bearer auth, per-attempt timeout,
/// exponential backoff on 429/5xx and a bound on in-flight requests.
#[derive(Clone)]
pub struct HttpProvider {
    config: Arc<ProviderConfig>,
    client: reqwest::Client,
    permits: Arc<Semaphore>,
    backoff_base: Duration,
}

impl std::fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProvider").field("config", &self.config).finish()
    }
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let client = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self {
            permits: Arc::new(Semaphore::new(config.permits)),
            config: Arc::new(config),
            client,
            backoff_base: Duration::from_millis(250),
        })
    }

    /// Delay before the first retry; doubles on each further retry.
    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.backoff_base = base;
        self
    }

    fn body(request: &LlmRequest) -> Value {
        let mut messages = vec![json!({"role": "system", "content": request.system_text})];
        messages.extend(
            request
                .messages
                .iter()
                .map(|m| json!({"role": m.role.as_str(), "content": m.content})),
        );
        json!({
            "model": request.model_id,
            "temperature": request.temperature,
            "messages": messages,
        })
    }

    async fn attempt(&self, body: &Value) -> Result<(u16, String, u64), GatewayError> {
        let mut builder = self.client.post(&self.config.endpoint_url).json(body);
        if !self.config.auth_token.is_empty() {
            builder = builder.bearer_auth(self.config.auth_token.expose());
        }
        let started = Instant::now();
        let response = builder.send().await.map_err(|e| self.transport(e))?;
        let status = response.status().as_u16();
        let text = response.text().await.map_err(|e| self.transport(e))?;
        Ok((status, text, started.elapsed().as_millis() as u64))
    }

    fn transport(&self, e: reqwest::Error) -> GatewayError {
        if e.is_timeout() {
            GatewayError::Timeout(self.config.timeout_ms)
        } else {
            // reqwest errors can carry the URL; never the auth header.
            GatewayError::Transport(e.without_url().to_string())
        }
    }
}

fn content_of(body: &str) -> Result<String, GatewayError> {
    let value: Value = serde_json::from_str(body).map_err(|e| GatewayError::BadResponse(e.to_string()))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| GatewayError::BadResponse("missing choices[0].message.content".into()))
}

#[async_trait]
impl Provider for HttpProvider {
    async fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, GatewayError> {
        if !(request.temperature.is_finite() && request.temperature >= 0.0) {
            return Err(GatewayError::Config(format!("bad temperature {}", request.temperature)));
        }
        let _permit = self
            .permits
            .acquire()
            .await
            .map_err(|_| GatewayError::Transport("provider closed".into()))?;
        let body = Self::body(request);
        let mut attempt = 0u32;
        loop {
            let (status, text, latency_ms) = self.attempt(&body).await?;
            let retryable = status == 429 || (500..600).contains(&status);
            if (200..300).contains(&status) {
                let mut provider_meta = std::collections::BTreeMap::new();
                provider_meta.insert("attempts".into(), json!(attempt + 1));
                provider_meta.insert("provider".into(), json!(self.config.name));
                return Ok(LlmResponse {
                    text: content_of(&text)?,
                    latency_ms,
                    provider_meta,
                });
            }
            if !retryable || attempt >= self.config.max_retries {
                return Err(if status == 429 {
                    GatewayError::RateLimited { attempts: attempt + 1 }
                } else {
                    GatewayError::Http { status, body: text }
                });
            }
            tracing::debug!(provider = %self.config.name, status, attempt, "retrying");
            tokio::time::sleep(self.backoff_base * 2u32.pow(attempt)).await;
            attempt += 1;
        }
    }

    fn name(&self) -> &str {
        &self.config.name
    }
}
