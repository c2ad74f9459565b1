//! HomeAssistant and model settings, as stored, as accepted and as shown.

use ecomate_gateway::{HaEndpoint, ProviderConfig, Secret};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::ApiError;

pub const DEFAULT_MODEL: &str = "gpt-3.5-turbo";
pub const DEFAULT_TEMPERATURE: f64 = 0.7;
const DEFAULT_TIMEOUT_MS: u64 = 60_000;

/// Secrets are written to the store file as plain strings. This is the only
/// place they are serialized.
fn expose<S: Serializer>(secret: &Secret, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(secret.expose())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderSettings {
    pub endpoint_url: String,
    pub model_id: String,
    pub temperature: f64,
    pub timeout_ms: u64,
    #[serde(serialize_with = "expose", default)]
    pub auth_token: Secret,
}

impl Default for ProviderSettings {
    fn default() -> Self {
        Self {
            endpoint_url: String::new(),
            model_id: DEFAULT_MODEL.to_string(),
            temperature: DEFAULT_TEMPERATURE,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            auth_token: Secret::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Settings {
    pub ha_base_url: String,
    #[serde(serialize_with = "expose", default)]
    pub ha_token: Secret,
    pub username: String,
    pub provider: ProviderSettings,
}

impl Settings {
    pub fn ha_endpoint(&self) -> Result<HaEndpoint, ApiError> {
        if self.ha_base_url.is_empty() || self.ha_token.is_empty() {
            return Err(ApiError::SettingsMissing("HomeAssistant url and token are required".into()));
        }
        Ok(HaEndpoint::new(self.ha_base_url.clone(), self.ha_token.clone()))
    }

    pub fn chat_username(&self) -> Result<&str, ApiError> {
        let name = self.username.trim();
        if name.is_empty() {
            return Err(ApiError::SettingsMissing("a username is required".into()));
        }
        Ok(name)
    }

    /// Provider connection built from the stored endpoint. `fallback_token`
    /// is used when no token was saved through the settings form.
    pub fn provider_config(&self, fallback_token: &Secret) -> Result<ProviderConfig, ApiError> {
        if self.provider.endpoint_url.is_empty() {
            return Err(ApiError::SettingsMissing("a model endpoint is required".into()));
        }
        let mut config = ProviderConfig::new("settings", self.provider.endpoint_url.clone());
        config.timeout_ms = self.provider.timeout_ms;
        config.auth_token = if self.provider.auth_token.is_empty() {
            fallback_token.clone()
        } else {
            self.provider.auth_token.clone()
        };
        Ok(config)
    }

    pub fn secrets(&self) -> impl Iterator<Item = &Secret> {
        [&self.ha_token, &self.provider.auth_token].into_iter()
    }

    pub fn apply(&mut self, update: SettingsUpdate) -> Result<(), ApiError> {
        check_url("ha_base_url", &update.ha_base_url)?;
        check_url("provider.endpoint_url", &update.provider.endpoint_url)?;
        let p = &update.provider;
        if !(p.temperature.is_finite() && (0.0..=2.0).contains(&p.temperature)) {
            return Err(ApiError::Schema(format!(
                "provider.temperature must lie in [0, 2], found {}",
                p.temperature
            )));
        }
        if p.model_id.trim().is_empty() {
            return Err(ApiError::Schema("provider.model_id must not be empty".into()));
        }
        if p.timeout_ms == Some(0) {
            return Err(ApiError::Schema("provider.timeout_ms must be positive".into()));
        }

        self.ha_base_url = update.ha_base_url;
        if let Some(token) = update.ha_token {
            self.ha_token = Secret::new(token);
        }
        self.username = update.username.trim().to_string();
        self.provider.endpoint_url = update.provider.endpoint_url;
        self.provider.model_id = update.provider.model_id;
        self.provider.temperature = update.provider.temperature;
        if let Some(ms) = update.provider.timeout_ms {
            self.provider.timeout_ms = ms;
        }
        if let Some(token) = update.provider.auth_token {
            self.provider.auth_token = Secret::new(token);
        }
        Ok(())
    }

    pub fn view(&self, fallback_token: &Secret) -> SettingsView {
        let shown = |s: &Secret| (!s.is_empty()).then(|| s.redacted());
        let provider_token = if self.provider.auth_token.is_empty() {
            fallback_token
        } else {
            &self.provider.auth_token
        };
        SettingsView {
            ha_base_url: self.ha_base_url.clone(),
            ha_token: shown(&self.ha_token),
            ha_configured: self.ha_endpoint().is_ok(),
            username: self.username.clone(),
            provider: ProviderView {
                endpoint_url: self.provider.endpoint_url.clone(),
                model_id: self.provider.model_id.clone(),
                temperature: self.provider.temperature,
                timeout_ms: self.provider.timeout_ms,
                auth_token: shown(provider_token),
                configured: !self.provider.endpoint_url.is_empty(),
            },
        }
    }
}

/// Empty means "not configured"; anything else must be an http(s) URL.
fn check_url(field: &str, value: &str) -> Result<(), ApiError> {
    if value.is_empty() {
        return Ok(());
    }
    match url::Url::parse(value) {
        Ok(u) if matches!(u.scheme(), "http" | "https") && u.host().is_some() => Ok(()),
        Ok(u) => Err(ApiError::Schema(format!("{field}: unsupported url scheme '{}'", u.scheme()))),
        Err(e) => Err(ApiError::Schema(format!("{field}: {e}"))),
    }
}

/// Body of `PUT /api/settings`. Omitted tokens keep their stored value, an
/// empty string clears them.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsUpdate {
    pub ha_base_url: String,
    #[serde(default)]
    pub ha_token: Option<String>,
    pub username: String,
    pub provider: ProviderUpdate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderUpdate {
    pub endpoint_url: String,
    pub model_id: String,
    pub temperature: f64,
    #[serde(default)]
    pub timeout_ms: Option<u64>,
    #[serde(default)]
    pub auth_token: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsView {
    pub ha_base_url: String,
    pub ha_token: Option<String>,
    pub ha_configured: bool,
    pub username: String,
    pub provider: ProviderView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderView {
    pub endpoint_url: String,
    pub model_id: String,
    pub temperature: f64,
    pub timeout_ms: u64,
    pub auth_token: Option<String>,
    pub configured: bool,
}
