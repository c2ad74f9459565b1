use thiserror::Error;

/// Errors raised while loading or checking the declarative inputs
/// (home templates, command datasets, energy annotations).
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("no annotation rows found")]
    EmptyInput,

    #[error("negative power reading for '{appliance_type}': {power_watts} W")]
    NegativePower {
        appliance_type: String,
        power_watts: f64,
    },
}

impl ModelError {
    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Self::Schema(msg.into())
    }
}

impl From<serde_json::Error> for ModelError {
    fn from(err: serde_json::Error) -> Self {
        Self::Parse(err.to_string())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("chat history is only accepted by the EcoMate chat variant")]
    HistoryOnBatchVariant,

    #[error("the EcoMate chat variant requires a username")]
    MissingUsername,

    #[error("user command must not be empty")]
    EmptyCommand,
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("record is valid; failure classification needs an invalid record")]
    PreconditionViolated,

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error("no matching counterpart for {0}")]
    UnmatchedKey(String),

    #[error("similarity inputs must be non-empty")]
    EmptyInput,
}
