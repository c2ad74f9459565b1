use std::time::{Duration, Instant};

use async_trait::async_trait;

use crate::{GatewayError, LlmRequest, LlmResponse, Provider};

/// Reply of the always-valid mock: one fenced automation that passes
/// offline validation against any home containing `light.kitchen`.
pub const ALWAYS_VALID_REPLY: &str = "Here is the routine:\n```json\n{\"alias\": \"Kitchen lights off at night\", \"trigger\": [{\"platform\": \"time\", \"at\": \"22:00:00\"}], \"action\": [{\"service\": \"light.turn_off\", \"entity_id\": \"light.kitchen\"}]}\n```\nLights off at 22:00 saves energy overnight.";

/// Returns a fixed text after an optional delay. Latency is measured
/// around the whole call, so it is never below the delay.
#[derive(Debug, Clone)]
pub struct MockProvider {
    text: String,
    delay: Duration,
}

impl MockProvider {
    pub fn always_valid() -> Self {
        Self::fixed(ALWAYS_VALID_REPLY)
    }

    pub fn fixed(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            delay: Duration::ZERO,
        }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }
}

#[async_trait]
impl Provider for MockProvider {
    async fn complete(&self, _request: &LlmRequest) -> Result<LlmResponse, GatewayError> {
        let started = Instant::now();
        if !self.delay.is_zero() {
            tokio::time::sleep(self.delay).await;
        }
        Ok(LlmResponse {
            text: self.text.clone(),
            latency_ms: started.elapsed().as_millis() as u64,
            provider_meta: Default::default(),
        })
    }

    fn name(&self) -> &str {
        "mock"
    }
}

/// Always fails with the given error; useful for exercising error paths.
#[derive(Debug, Clone)]
pub struct FailingProvider(pub GatewayError);

#[async_trait]
impl Provider for FailingProvider {
    async fn complete(&self, _request: &LlmRequest) -> Result<LlmResponse, GatewayError> {
        Err(self.0.clone())
    }

    fn name(&self) -> &str {
        "failing"
    }
}
