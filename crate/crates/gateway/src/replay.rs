//! Deterministic provider backed by recorded responses.
//!
//! Layout: `<root>/<model>/<temperature>/<sha256 of prompt>.json`, each file
//! holding `{"text": ..., "latency_ms": ...}`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use async_trait::async_trait;
use ecomate_core::analysis::format_temperature;
use serde::{Deserialize, Serialize};

use crate::{GatewayError, LlmRequest, LlmResponse, Provider};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub text: String,
    pub latency_ms: u64,
}

/// Relative path of the fixture answering `request`.
pub fn fixture_path(request: &LlmRequest) -> PathBuf {
    PathBuf::from(&request.model_id)
        .join(format_temperature(request.temperature))
        .join(format!("{}.json", request.prompt_digest()))
}

/// Write one fixture under `root`, creating directories as needed.
pub fn write_fixture(root: &Path, request: &LlmRequest, entry: &ReplayEntry) -> std::io::Result<PathBuf> {
    let path = root.join(fixture_path(request));
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut body = serde_json::to_string_pretty(entry)?;
    body.push('\n');
    std::fs::write(&path, body)?;
    Ok(path)
}

type Key = (String, String, String);

/// All fixtures of a store, loaded into memory up front.
#[derive(Debug, Clone, Default)]
pub struct ReplayProvider {
    entries: HashMap<Key, ReplayEntry>,
}

/// Load every fixture under `root`.
pub fn load_replay_store(root: impl AsRef<Path>) -> Result<ReplayProvider, GatewayError> {
    let root = root.as_ref();
    let store_err = |p: &Path, e: &dyn std::fmt::Display| GatewayError::Store(format!("{}: {e}", p.display()));
    let mut entries = HashMap::new();
    let read_dir = |p: &Path| std::fs::read_dir(p).map_err(|e| store_err(p, &e));
    for model in read_dir(root)? {
        let model = model.map_err(|e| store_err(root, &e))?.path();
        if !model.is_dir() {
            continue;
        }
        for temp in read_dir(&model)? {
            let temp = temp.map_err(|e| store_err(&model, &e))?.path();
            if !temp.is_dir() {
                continue;
            }
            for file in read_dir(&temp)? {
                let file = file.map_err(|e| store_err(&temp, &e))?.path();
                if file.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let text = std::fs::read_to_string(&file).map_err(|e| store_err(&file, &e))?;
                let entry: ReplayEntry = serde_json::from_str(&text).map_err(|e| store_err(&file, &e))?;
                let name = |p: &Path| p.file_name().unwrap_or_default().to_string_lossy().into_owned();
                let digest = file.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                entries.insert((name(&model), name(&temp), digest), entry);
            }
        }
    }
    Ok(ReplayProvider { entries })
}

impl ReplayProvider {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, request: &LlmRequest, entry: ReplayEntry) {
        self.entries.insert(Self::key(request), entry);
    }

    fn key(request: &LlmRequest) -> Key {
        (
            request.model_id.clone(),
            format_temperature(request.temperature),
            request.prompt_digest(),
        )
    }

    pub fn lookup(&self, request: &LlmRequest) -> Result<&ReplayEntry, GatewayError> {
        let key = Self::key(request);
        self.entries.get(&key).ok_or(GatewayError::MissingFixture {
            model: key.0,
            temperature: key.1,
            digest: key.2,
        })
    }
}

#[async_trait]
impl Provider for ReplayProvider {
    async fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, GatewayError> {
        let entry = self.lookup(request)?;
        Ok(LlmResponse {
            text: entry.text.clone(),
            latency_ms: entry.latency_ms,
            provider_meta: Default::default(),
        })
    }

    fn name(&self) -> &str {
        "replay"
    }
}
