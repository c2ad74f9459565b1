//! Offline validation of automation documents.
//!
//! Mirrors the three kinds of answers HomeAssistant's config API gives when
//! an automation is uploaded: a JSON syntax error, a schema error
//! ("Message malformed: ..."), or success.

mod js_syntax;
mod schema;

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::home::HomeTemplate;

pub use js_syntax::js_syntax_error;
pub use schema::{check_automation, is_hms, SchemaViolation, CONDITION_KINDS, MODES, TOP_LEVEL_KEYS, TRIGGER_PLATFORMS};

pub const VALID_MESSAGE: &str = "Home-assistant uploaded the automation correctly";
pub const PARSE_ERROR_PREFIX: &str = "Error while parsing the automation: SyntaxError: ";
pub const MALFORMED_PREFIX: &str = "Message malformed: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValidationStatus {
    Valid,
    ParseError,
    Malformed,
}

impl fmt::Display for ValidationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValidationStatus::Valid => "Valid",
            ValidationStatus::ParseError => "ParseError",
            ValidationStatus::Malformed => "Malformed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub status: ValidationStatus,
    pub message: String,
    pub offending_path: Option<String>,
}

impl ValidationOutcome {
    pub fn valid() -> Self {
        Self {
            status: ValidationStatus::Valid,
            message: VALID_MESSAGE.to_string(),
            offending_path: None,
        }
    }

    pub fn parse_error(detail: &str) -> Self {
        Self {
            status: ValidationStatus::ParseError,
            message: format!("{PARSE_ERROR_PREFIX}{detail}"),
            offending_path: None,
        }
    }

    pub fn malformed(detail: &str, key: &str) -> Self {
        let path = format!("data['{key}']");
        Self {
            status: ValidationStatus::Malformed,
            message: format!("{MALFORMED_PREFIX}{detail} @ {path}"),
            offending_path: Some(path),
        }
    }

    /// Classify a message returned by a live HomeAssistant instance.
    pub fn from_server_message(message: &str) -> Self {
        let status = if message == VALID_MESSAGE {
            ValidationStatus::Valid
        } else if message.starts_with(PARSE_ERROR_PREFIX) {
            ValidationStatus::ParseError
        } else {
            ValidationStatus::Malformed
        };
        let offending_path = message
            .rfind(" @ ")
            .map(|idx| message[idx + 3..].to_string());
        Self {
            status,
            message: message.to_string(),
            offending_path,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status == ValidationStatus::Valid
    }
}

/// Validate an automation document against the whitelist schema.
///
/// With `strict_entities`, every referenced entity must exist in `template`
/// and service calls may only target entities of their own domain.
pub fn validate_offline(json_text: &str, template: &HomeTemplate, strict_entities: bool) -> ValidationOutcome {
    if let Some(detail) = js_syntax_error(json_text) {
        return ValidationOutcome::parse_error(&detail);
    }
    let value: Value = match serde_json::from_str(json_text) {
        Ok(v) => v,
        Err(e) => return ValidationOutcome::parse_error(&e.to_string()),
    };
    match check_automation(&value, template, strict_entities) {
        Ok(()) => ValidationOutcome::valid(),
        Err(v) => ValidationOutcome::malformed(&v.detail, &v.key),
    }
}

/// Typed view of an automation that passed validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Automation {
    pub alias: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(deserialize_with = "one_or_many")]
    pub trigger: Vec<Trigger>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Vec::is_empty")]
    pub condition: Vec<Map<String, Value>>,
    #[serde(deserialize_with = "one_or_many")]
    pub action: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trigger {
    pub platform: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_id: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub above: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub below: Option<Value>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_id: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Map<String, Value>>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

fn one_or_many<'de, D, T>(de: D) -> Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: serde::de::DeserializeOwned,
{
    let value = Value::deserialize(de)?;
    match value {
        Value::Array(items) => items
            .into_iter()
            .map(|v| serde_json::from_value(v).map_err(serde::de::Error::custom))
            .collect(),
        other => serde_json::from_value(other)
            .map(|v| vec![v])
            .map_err(serde::de::Error::custom),
    }
}

impl Automation {
    /// Parse a document that `validate_offline` accepted.
    pub fn from_valid_json(json_text: &str) -> Option<Self> {
        serde_json::from_str(json_text).ok()
    }
}
