//! Zero-shot prompt assembly.
//!
//! Each variant is a three-part instruction text (general, routine,
//! explanation) stored as a versioned template under `prompts/`. The home
//! template and the energy profile are serialized canonically and placed in
//! front of the instructions.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyProfile;
use crate::error::PromptError;
use crate::home::HomeTemplate;

/// Messages of an EcoMate conversation kept in the prompt.
pub const HISTORY_WINDOW: usize = 5;

const EXPLANATION_WORD_BUDGET: usize = 20;

const GREEN_TEMPLATE: &str = include_str!("../prompts/green.toml");
const NO_GREEN_TEMPLATE: &str = include_str!("../prompts/no_green.toml");
const ECOMATE_CHAT_TEMPLATE: &str = include_str!("../prompts/ecomate_chat.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptVariant {
    Green,
    NoGreen,
    EcoMateChat,
}

impl PromptVariant {
    /// Label used in record files ("Green", "No green").
    pub fn label(self) -> &'static str {
        match self {
            PromptVariant::Green => "Green",
            PromptVariant::NoGreen => "No green",
            PromptVariant::EcoMateChat => "EcoMate",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], " ").as_str() {
            "green" => Some(PromptVariant::Green),
            "no green" | "nogreen" => Some(PromptVariant::NoGreen),
            "ecomate" | "ecomate chat" => Some(PromptVariant::EcoMateChat),
            _ => None,
        }
    }

    pub fn is_batch(self) -> bool {
        !matches!(self, PromptVariant::EcoMateChat)
    }

    fn template(self) -> &'static PromptTemplate {
        static GREEN: OnceLock<PromptTemplate> = OnceLock::new();
        static NO_GREEN: OnceLock<PromptTemplate> = OnceLock::new();
        static CHAT: OnceLock<PromptTemplate> = OnceLock::new();
        let (cell, src) = match self {
            PromptVariant::Green => (&GREEN, GREEN_TEMPLATE),
            PromptVariant::NoGreen => (&NO_GREEN, NO_GREEN_TEMPLATE),
            PromptVariant::EcoMateChat => (&CHAT, ECOMATE_CHAT_TEMPLATE),
        };
        cell.get_or_init(|| toml::from_str(src).expect("bundled prompt templates are valid TOML"))
    }
}

impl fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The three instruction parts of one prompt variant.
#[derive(Debug, Clone, Deserialize)]
pub struct PromptTemplate {
    pub version: u32,
    pub general: String,
    pub routine: String,
    pub explanation: String,
}

impl PromptTemplate {
    pub fn for_variant(variant: PromptVariant) -> &'static PromptTemplate {
        variant.template()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptBundle {
    pub variant: PromptVariant,
    /// General, routine and explanation parts with placeholders filled.
    pub system_text: String,
    pub home_config_json: String,
    pub energy_json: String,
    pub user_command: String,
    pub history: Vec<ChatMessage>,
    pub username: Option<String>,
}

impl PromptBundle {
    /// The full instruction block sent as the system message: home JSON,
    /// energy JSON, then the instruction text.
    pub fn rendered_system(&self) -> String {
        format!(
            "{}\n\n{}\n\n{}",
            self.home_config_json, self.energy_json, self.system_text
        )
    }

    /// Conversation turns following the system message.
    pub fn messages(&self) -> &[ChatMessage] {
        &self.history
    }
}

fn fill(text: &str, key: &str, value: &str) -> String {
    text.replace(&format!("{{{{{key}}}}}"), value)
}

/// Assemble a prompt for one request.
///
/// For the chat variant `history` is the session transcript; the command is
/// appended as a user turn when it is not already the last message, and only
/// the most recent [`HISTORY_WINDOW`] messages are kept.
pub fn build_prompt(
    variant: PromptVariant,
    template: &HomeTemplate,
    profile: &EnergyProfile,
    command: &str,
    history: &[ChatMessage],
    username: Option<&str>,
) -> Result<PromptBundle, PromptError> {
    if command.trim().is_empty() {
        return Err(PromptError::EmptyCommand);
    }
    let parts = variant.template();
    let (system_text, history, username) = match variant {
        PromptVariant::Green | PromptVariant::NoGreen => {
            if !history.is_empty() {
                return Err(PromptError::HistoryOnBatchVariant);
            }
            let explanation = fill(&parts.explanation, "user_command", command);
            let text = join_parts(&parts.general, &parts.routine, &explanation);
            (text, Vec::new(), username.map(str::to_string))
        }
        PromptVariant::EcoMateChat => {
            let name = username
                .filter(|u| !u.trim().is_empty())
                .ok_or(PromptError::MissingUsername)?;
            let general = fill(&parts.general, "username", name);
            let text = join_parts(&general, &parts.routine, &parts.explanation);

            let mut turns = history.to_vec();
            let already_last = turns
                .last()
                .is_some_and(|m| m.role == Role::User && m.content == command);
            if !already_last {
                turns.push(ChatMessage::user(command));
            }
            let start = turns.len().saturating_sub(HISTORY_WINDOW);
            (text, turns.split_off(start), Some(name.to_string()))
        }
    };

    Ok(PromptBundle {
        variant,
        system_text,
        home_config_json: template.to_canonical_json(),
        energy_json: profile.to_canonical_json(),
        user_command: command.to_string(),
        history,
        username,
    })
}

fn join_parts(general: &str, routine: &str, explanation: &str) -> String {
    format!("{general}\n\n{routine}\n\n{explanation}")
}

/// Word limit the prompts give for the explanation following a routine.
pub fn explanation_word_budget() -> usize {
    EXPLANATION_WORD_BUDGET
}

/// True when the explanation text runs past the word budget. Over-budget
/// explanations are flagged, never rejected.
pub fn explanation_over_budget(explanation: &str) -> bool {
    explanation.split_whitespace().count() > EXPLANATION_WORD_BUDGET
}
