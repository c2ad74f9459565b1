//! User-command dataset: natural-language requests grouped into categories.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::home::{HomeTemplate, SensorType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalType {
    Immediate,
    Persistent,
}

impl GoalType {
    pub fn as_str(self) -> &'static str {
        match self {
            GoalType::Immediate => "immediate",
            GoalType::Persistent => "persistent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "immediate" => Some(GoalType::Immediate),
            "persistent" => Some(GoalType::Persistent),
            _ => None,
        }
    }
}

impl fmt::Display for GoalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserCommand {
    pub text: String,
    pub goal_type: GoalType,
    pub category: String,
    #[serde(default)]
    pub example_tap: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandCategory {
    pub name: String,
    pub relevant_appliance_types: BTreeSet<String>,
    /// Sensor types that best observe this category's goal, most preferred first.
    #[serde(default)]
    pub preferred_sensor_types: Vec<SensorType>,
}

impl CommandCategory {
    pub fn is_relevant(&self, appliance_type: &str) -> bool {
        self.relevant_appliance_types.contains(appliance_type)
    }

    /// Whether the home holds at least one appliance relevant to this category.
    pub fn has_relevant_appliance(&self, home: &HomeTemplate) -> bool {
        home.appliances
            .iter()
            .any(|a| self.is_relevant(&a.appliance_type))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandDataset {
    #[serde(default)]
    pub version: String,
    pub categories: Vec<CommandCategory>,
    pub commands: Vec<UserCommand>,
}

impl CommandDataset {
    pub fn from_json(document: &str) -> Result<Self, ModelError> {
        let dataset: CommandDataset = serde_json::from_str(document).map_err(|e| {
            if e.is_data() {
                ModelError::Schema(e.to_string())
            } else {
                ModelError::Parse(e.to_string())
            }
        })?;
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut names = HashSet::new();
        for cat in &self.categories {
            if !names.insert(cat.name.as_str()) {
                return Err(ModelError::schema(format!("duplicate category '{}'", cat.name)));
            }
            if cat.relevant_appliance_types.is_empty() {
                return Err(ModelError::schema(format!(
                    "category '{}' has no relevant appliance types",
                    cat.name
                )));
            }
        }
        for (idx, cmd) in self.commands.iter().enumerate() {
            if cmd.text.trim().is_empty() {
                return Err(ModelError::schema(format!("command #{idx} has empty text")));
            }
            if !names.contains(cmd.category.as_str()) {
                return Err(ModelError::schema(format!(
                    "command '{}' has unknown category '{}'",
                    cmd.text, cmd.category
                )));
            }
        }
        Ok(())
    }

    pub fn category(&self, name: &str) -> Option<&CommandCategory> {
        self.categories.iter().find(|c| c.name == name)
    }

    pub fn category_of(&self, command: &UserCommand) -> &CommandCategory {
        self.category(&command.category)
            .expect("validated datasets resolve every command category")
    }
}

/// Load the dataset and return its commands and category registry.
pub fn load_command_dataset(
    document: &str,
) -> Result<(Vec<UserCommand>, Vec<CommandCategory>), ModelError> {
    let dataset = CommandDataset::from_json(document)?;
    Ok((dataset.commands, dataset.categories))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(command: &str) -> String {
        format!(
            r#"{{"categories":[{{"name":"Ambient Luminance","relevant_appliance_types":["lightbulb"]}}],
               "commands":[{command}]}}"#
        )
    }

    #[test]
    fn accepts_known_category() {
        let (cmds, cats) = load_command_dataset(&doc(
            r#"{"text":"make it less bright","category":"Ambient Luminance","goal_type":"immediate"}"#,
        ))
        .unwrap();
        assert_eq!(cmds[0].goal_type, GoalType::Immediate);
        assert_eq!(cats.len(), 1);
    }

    #[test]
    fn rejects_bad_goal_type() {
        let err = load_command_dataset(&doc(
            r#"{"text":"x","category":"Ambient Luminance","goal_type":"weekly"}"#,
        ))
        .unwrap_err();
        assert!(matches!(err, ModelError::Schema(_)));
    }

    #[test]
    fn rejects_unknown_category() {
        let err = load_command_dataset(&doc(
            r#"{"text":"x","category":"Gardening","goal_type":"immediate"}"#,
        ))
        .unwrap_err();
        assert!(matches!(err, ModelError::Schema(msg) if msg.contains("Gardening")));
    }

    #[test]
    fn rejects_empty_text() {
        let err = load_command_dataset(&doc(
            r#"{"text":"  ","category":"Ambient Luminance","goal_type":"immediate"}"#,
        ))
        .unwrap_err();
        assert!(matches!(err, ModelError::Schema(_)));
    }
}
