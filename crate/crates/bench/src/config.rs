//! Grid configuration, loaded from TOML.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Provider credentials are never stored in the file; HTTP providers
//! name an environment variable instead.

use std::path::{Path, PathBuf};

use ecomate_core::PromptVariant;
use ecomate_gateway::{ProviderConfig, Secret};
use serde::{Deserialize, Deserializer};

use crate::BenchError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub llms: Vec<LlmSpec>,
    #[serde(deserialize_with = "prompt_labels")]
    pub prompts: Vec<PromptVariant>,
    pub temperatures: Vec<f64>,
    pub command_dataset_path: PathBuf,
    pub template_path: PathBuf,
    /// A CSV file, or a directory whose `*.csv` files are all ingested.
    pub energy_path: PathBuf,
    #[serde(default)]
    pub replay_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn default_parallelism() -> usize {
    8
}

fn prompt_labels<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<PromptVariant>, D::Error> {
    let labels = Vec::<String>::deserialize(d)?;
    labels
        .iter()
        .map(|l| match PromptVariant::from_label(l) {
            Some(v) if v.is_batch() => Ok(v),
            _ => Err(serde::de::Error::custom(format!("unknown benchmark prompt '{l}'"))),
        })
        .collect()
}

/// One model in the grid and how to reach it.
#[derive(Debug, Clone, Deserialize)]
pub struct LlmSpec {
    pub model_id: String,
    #[serde(flatten)]
    pub provider: ProviderKind,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case")]
pub enum ProviderKind {
    /// Recorded responses from `replay_dir`.
    Replay,
    /// Canned always-valid replies; useful for smoke runs.
    Mock,
    /// A live OpenAI-style endpoint.
    Http {
        endpoint_url: String,
        /// Environment variable holding the bearer token.
        #[serde(default)]
        token_env: Option<String>,
        #[serde(default)]
        timeout_ms: Option<u64>,
        #[serde(default)]
        max_retries: Option<u32>,
        #[serde(default)]
        permits: Option<usize>,
    },
}

impl ProviderKind {
    /// Build the gateway configuration, reading the token from the
    /// environment.
    pub fn http_config(&self, name: &str) -> Option<Result<ProviderConfig, BenchError>> {
        let ProviderKind::Http {
            endpoint_url,
            token_env,
            timeout_ms,
            max_retries,
            permits,
        } = self
        else {
            return None;
        };
        let mut config = ProviderConfig::new(name, endpoint_url.clone());
        if let Some(var) = token_env {
            match std::env::var(var) {
                Ok(token) => config.auth_token = Secret::new(token),
                Err(_) => return Some(Err(BenchError::Config(format!("environment variable {var} is not set")))),
            }
        }
        if let Some(t) = timeout_ms {
            config.timeout_ms = *t;
        }
        if let Some(r) = max_retries {
            config.max_retries = *r;
        }
        if let Some(p) = permits {
            config.permits = *p;
        }
        Some(Ok(config))
    }
}

impl GridConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    /// Read, resolve relative paths against the file's directory, and check.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.command_dataset_path);
        join(&mut self.template_path);
        join(&mut self.energy_path);
        join(&mut self.output_dir);
        if let Some(dir) = self.replay_dir.as_mut() {
            join(dir);
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::Config(msg.to_string()));
        if self.llms.is_empty() {
            return bad("llms must not be empty");
        }
        if self.prompts.is_empty() {
            return bad("prompts must not be empty");
        }
        if self.temperatures.is_empty() {
            return bad("temperatures must not be empty");
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1");
        }
        if self.temperatures.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("temperatures must be finite and non-negative");
        }
        let uses_replay = self
            .llms
            .iter()
            .any(|l| matches!(l.provider, ProviderKind::Replay));
        if uses_replay && self.replay_dir.is_none() {
            return bad("replay providers need replay_dir");
        }
        Ok(())
    }

    /// Number of records a complete run produces.
    pub fn cardinality(&self, commands: usize) -> usize {
        self.llms.len() * self.prompts.len() * self.temperatures.len() * commands
    }
}
