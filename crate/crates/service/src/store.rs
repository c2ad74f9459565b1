//! On-disk document store. The whole state lives in one JSON file that is
//! rewritten atomically on every change; a single writer at a time builds
//! the next version, so readers never wait on disk I/O.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ecomate_core::{HomeTemplate, Role};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, RwLock};

use crate::error::ApiError;
use crate::routine::RoutineRecord;
use crate::settings::Settings;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMessage {
    pub role: Role,
    /// Raw text. Assistant turns keep their JSON so the model sees the
    /// routine it proposed on the next turn.
    pub text: String,
    pub timestamp_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routine_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatSession {
    pub id: String,
    pub username: String,
    pub messages: Vec<SessionMessage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    pub home: HomeTemplate,
    pub settings: Settings,
    pub routines: Vec<RoutineRecord>,
    pub sessions: BTreeMap<String, ChatSession>,
    pub next_routine: u64,
}

impl Document {
    pub fn fresh(home: HomeTemplate) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            home,
            settings: Settings::default(),
            routines: Vec::new(),
            sessions: BTreeMap::new(),
            next_routine: 1,
        }
    }

    pub fn routine(&self, id: &str) -> Result<&RoutineRecord, ApiError> {
        self.routines
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| ApiError::NotFound(format!("routine '{id}'")))
    }

    pub fn routine_mut(&mut self, id: &str) -> Result<&mut RoutineRecord, ApiError> {
        self.routines
            .iter_mut()
            .find(|r| r.id == id)
            .ok_or_else(|| ApiError::NotFound(format!("routine '{id}'")))
    }

    pub fn allocate_routine_id(&mut self) -> String {
        let id = format!("rt-{}", self.next_routine);
        self.next_routine += 1;
        id
    }

    pub fn from_json(text: &str) -> Result<Self, StoreError> {
        #[derive(Deserialize)]
        struct Version {
            schema_version: u32,
        }
        let version: Version = serde_json::from_str(text).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        if version.schema_version != SCHEMA_VERSION {
            return Err(StoreError::Version(version.schema_version));
        }
        let doc: Document = serde_json::from_str(text).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        doc.home
            .validate()
            .map_err(|e| StoreError::Corrupt(e.to_string()))?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("document serializes");
        text.push('\n');
        text
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("store file is not a valid document: {0}")]
    Corrupt(String),
    #[error("store schema version {0} is not supported (expected {SCHEMA_VERSION})")]
    Version(u32),
}

pub struct Store {
    path: PathBuf,
    doc: RwLock<Document>,
    writer: Mutex<()>,
}

impl Store {
    /// Open the store at `path`, creating it from `seed` when absent.
    pub fn open(path: impl Into<PathBuf>, seed: &HomeTemplate) -> Result<Self, StoreError> {
        let path = path.into();
        let doc = match std::fs::read_to_string(&path) {
            Ok(text) => Document::from_json(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                let doc = Document::fresh(seed.clone());
                persist_sync(&path, &doc)?;
                doc
            }
            Err(e) => return Err(io_error(&path, e)),
        };
        Ok(Self {
            path,
            doc: RwLock::new(doc),
            writer: Mutex::new(()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub async fn read<T>(&self, f: impl FnOnce(&Document) -> T) -> T {
        f(&*self.doc.read().await)
    }

    /// Apply `f` to a copy of the document, persist it, then publish it.
    /// When `f` fails nothing changes.
    pub async fn write<T>(&self, f: impl FnOnce(&mut Document) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let _writer = self.writer.lock().await;
        let mut next = self.doc.read().await.clone();
        let out = f(&mut next)?;
        let text = next.to_json();
        let tmp = self.path.with_extension("json.tmp");
        tokio::fs::write(&tmp, text.as_bytes())
            .await
            .map_err(|e| ApiError::Store(io_error(&tmp, e).to_string()))?;
        tokio::fs::rename(&tmp, &self.path)
            .await
            .map_err(|e| ApiError::Store(io_error(&self.path, e).to_string()))?;
        *self.doc.write().await = next;
        Ok(out)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn persist_sync(path: &Path, doc: &Document) -> Result<(), StoreError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    std::fs::write(path, doc.to_json()).map_err(|e| io_error(path, e))
}
