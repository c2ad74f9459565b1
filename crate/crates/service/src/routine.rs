//! Routine records and their lifecycle.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutineStatus {
    Draft,
    Saved,
    Submitted,
}

impl fmt::Display for RoutineStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoutineStatus::Draft => "draft",
            RoutineStatus::Saved => "saved",
            RoutineStatus::Submitted => "submitted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoutineAction {
    Save,
    Submit,
    Delete,
}

impl fmt::Display for RoutineAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoutineAction::Save => "save",
            RoutineAction::Submit => "submit",
            RoutineAction::Delete => "delete",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot {action} a {from} routine")]
pub struct InvalidTransition {
    pub from: RoutineStatus,
    pub action: RoutineAction,
}

/// Where `action` leads from `status`. `None` means the routine is removed.
pub fn transition(status: RoutineStatus, action: RoutineAction) -> Result<Option<RoutineStatus>, InvalidTransition> {
    use RoutineAction::*;
    use RoutineStatus::*;
    match (status, action) {
        (Draft, Save) => Ok(Some(Saved)),
        (Saved, Submit) => Ok(Some(Submitted)),
        (Draft | Saved, Delete) => Ok(None),
        (from, action) => Err(InvalidTransition { from, action }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutineRecord {
    pub id: String,
    /// Title shown in lists, taken from the automation's `alias`.
    pub alias: Option<String>,
    pub automation_json: String,
    pub status: RoutineStatus,
    pub created_at_ms: u64,
    pub source_session: String,
}

impl RoutineRecord {
    pub fn alias_of(json_text: &str) -> Option<String> {
        let value: serde_json::Value = serde_json::from_str(json_text).ok()?;
        value.get("alias")?.as_str().map(str::to_string)
    }
}
