use std::collections::BTreeMap;
use std::fmt;

use ecomate_core::canonical::to_canonical_string;
use ecomate_core::{ChatMessage, PromptBundle};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

/// A credential that never shows up in `Debug`, `Display` or logs.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// "••••" followed by the last four characters.
    pub fn redacted(&self) -> String {
        let tail: String = {
            let chars: Vec<char> = self.0.chars().collect();
            chars[chars.len().saturating_sub(4)..].iter().collect()
        };
        format!("••••{tail}")
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret(••••)")
    }
}

impl fmt::Display for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("••••")
    }
}

impl<'de> Deserialize<'de> for Secret {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer).map(Secret)
    }
}

/// One chat-completion request.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlmRequest {
    pub model_id: String,
    pub temperature: f64,
    pub system_text: String,
    pub messages: Vec<ChatMessage>,
}

impl LlmRequest {
    pub fn from_bundle(model_id: impl Into<String>, temperature: f64, bundle: &PromptBundle) -> Self {
        Self {
            model_id: model_id.into(),
            temperature,
            system_text: bundle.rendered_system(),
            messages: bundle.messages().to_vec(),
        }
    }

    /// Hex SHA-256 of the prompt: canonical JSON of the system text and the
    /// conversation turns. Model and temperature are not part of it.
    pub fn prompt_digest(&self) -> String {
        let doc = serde_json::json!({
            "system": self.system_text,
            "messages": self.messages,
        });
        hex::encode(Sha256::digest(to_canonical_string(&doc).as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    /// Raw model output, untrimmed.
    pub text: String,
    pub latency_ms: u64,
    #[serde(default)]
    pub provider_meta: BTreeMap<String, serde_json::Value>,
}

/// Connection settings for one chat-completions endpoint.
#[derive(Debug, Clone, Deserialize)]
pub struct ProviderConfig {
    pub name: String,
    pub endpoint_url: String,
    #[serde(default)]
    pub auth_token: Secret,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Concurrent in-flight requests allowed against this endpoint.
    #[serde(default = "default_permits")]
    pub permits: usize,
}

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_max_retries() -> u32 {
    3
}

fn default_permits() -> usize {
    4
}

impl ProviderConfig {
    pub fn new(name: impl Into<String>, endpoint_url: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            endpoint_url: endpoint_url.into(),
            auth_token: Secret::default(),
            timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            permits: default_permits(),
        }
    }

    pub fn validate(&self) -> Result<(), crate::GatewayError> {
        if self.timeout_ms == 0 {
            return Err(crate::GatewayError::Config("timeout_ms must be positive".into()));
        }
        if self.permits == 0 {
            return Err(crate::GatewayError::Config("permits must be at least 1".into()));
        }
        url::Url::parse(&self.endpoint_url)
            .map_err(|e| crate::GatewayError::Config(format!("endpoint_url: {e}")))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secret_is_redacted_everywhere() {
        let s = Secret::new("sk-abcdef123456");
        assert_eq!(format!("{s:?}"), "Secret(••••)");
        assert_eq!(s.to_string(), "••••");
        assert_eq!(s.redacted(), "••••3456");
        let cfg = ProviderConfig {
            auth_token: s,
            ..ProviderConfig::new("x", "http://localhost")
        };
        assert!(!format!("{cfg:?}").contains("abcdef"));
    }

    #[test]
    fn short_secret_redaction() {
        assert_eq!(Secret::new("ab").redacted(), "••••ab");
    }

    #[test]
    fn digest_ignores_model_and_temperature() {
        let a = LlmRequest {
            model_id: "a".into(),
            temperature: 0.0,
            system_text: "sys".into(),
            messages: vec![],
        };
        let b = LlmRequest {
            model_id: "b".into(),
            temperature: 0.7,
            ..a.clone()
        };
        assert_eq!(a.prompt_digest(), b.prompt_digest());
        assert_eq!(a.prompt_digest().len(), 64);
        let c = LlmRequest {
            system_text: "sys ".into(),
            ..a.clone()
        };
        assert_ne!(a.prompt_digest(), c.prompt_digest());
    }

    #[test]
    fn config_validation() {
        assert!(ProviderConfig::new("x", "http://localhost:1/v1").validate().is_ok());
        assert!(ProviderConfig::new("x", "not a url").validate().is_err());
        let zero = ProviderConfig {
            timeout_ms: 0,
            ..ProviderConfig::new("x", "http://localhost")
        };
        assert!(zero.validate().is_err());
    }
}
