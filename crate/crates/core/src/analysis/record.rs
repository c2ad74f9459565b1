use std::fmt;

use serde::{Deserialize, Serialize};

use crate::commands::GoalType;
use crate::prompt::PromptVariant;

/// Why an invalid routine failed, in the device/sensor taxonomy plus a
/// catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureClass {
    DeviceExtra,
    SensorTriggerValue,
    DeviceOptionExists,
    DeviceSetting,
    DeviceHallucinated,
    SensorSuboptimalChoice,
    DeviceNoOptionExists,
    Other,
}

impl FailureClass {
    pub const ALL: [FailureClass; 8] = [
        FailureClass::DeviceExtra,
        FailureClass::SensorTriggerValue,
        FailureClass::DeviceOptionExists,
        FailureClass::DeviceSetting,
        FailureClass::DeviceHallucinated,
        FailureClass::SensorSuboptimalChoice,
        FailureClass::DeviceNoOptionExists,
        FailureClass::Other,
    ];

    /// Stable identifier used in CSV files.
    pub fn id(self) -> &'static str {
        match self {
            FailureClass::DeviceExtra => "DeviceExtra",
            FailureClass::SensorTriggerValue => "SensorTriggerValue",
            FailureClass::DeviceOptionExists => "DeviceOptionExists",
            FailureClass::DeviceSetting => "DeviceSetting",
            FailureClass::DeviceHallucinated => "DeviceHallucinated",
            FailureClass::SensorSuboptimalChoice => "SensorSuboptimalChoice",
            FailureClass::DeviceNoOptionExists => "DeviceNoOptionExists",
            FailureClass::Other => "Other",
        }
    }

    /// Human label, e.g. "Device → Extra".
    pub fn label(self) -> &'static str {
        match self {
            FailureClass::DeviceExtra => "Device → Extra",
            FailureClass::SensorTriggerValue => "Sensor → Trigger value",
            FailureClass::DeviceOptionExists => "Device → Option exists",
            FailureClass::DeviceSetting => "Device → Setting",
            FailureClass::DeviceHallucinated => "Device → Hallucinated",
            FailureClass::SensorSuboptimalChoice => "Sensor → Suboptimal choice",
            FailureClass::DeviceNoOptionExists => "Device → No option exists",
            FailureClass::Other => "Other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.id() == s || c.label() == s)
    }
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One benchmark cell: a command sent to one model with one prompt variant
/// at one temperature, and what came back.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub user_command: String,
    pub goal_type: GoalType,
    pub category: String,
    pub llm: String,
    pub prompt: PromptVariant,
    pub temperature: f64,
    pub output: String,
    /// Text submitted to the validator, if any was found.
    pub json: Option<String>,
    pub latency_ms: u64,
    pub json_validity: bool,
    pub ha_response: String,
    pub failure_class: Option<FailureClass>,
    /// Explanation past the word budget. Derived from `output`; not a column.
    pub explanation_over_budget: bool,
}

impl RunRecord {
    /// The routine document, when the submitted text parses as JSON.
    pub fn parsed_json(&self) -> Option<serde_json::Value> {
        self.json
            .as_deref()
            .and_then(|j| serde_json::from_str(j).ok())
    }

    pub fn has_routine(&self) -> bool {
        self.json.as_deref().is_some_and(|j| !j.trim().is_empty())
    }
}

/// Render a temperature the way record files and fixture paths spell it
/// ("0", "0.7").
pub fn format_temperature(t: f64) -> String {
    format!("{t}")
}
