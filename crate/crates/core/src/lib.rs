//! Core of the EcoMate routine-generation toolkit: the smart-home model,
//! prompt assembly, routine extraction, offline HomeAssistant validation and
//! the benchmark metrics.

pub mod analysis;
pub mod canonical;
pub mod commands;
pub mod energy;
pub mod error;
pub mod extract;
pub mod home;
pub mod prompt;
pub mod validate;

pub use commands::{load_command_dataset, CommandCategory, CommandDataset, GoalType, UserCommand};
pub use energy::{ingest_energy_annotations, AnnotationTable, EnergyProfile};
pub use error::{AnalysisError, ModelError, PromptError};
pub use extract::{extract, ExtractionMethod, ExtractionResult};
pub use home::{Appliance, HomeTemplate, Room, Sensor, SensorType};
pub use prompt::{build_prompt, ChatMessage, PromptBundle, PromptVariant, Role};
pub use validate::{validate_offline, ValidationOutcome, ValidationStatus};

/// Parse a home template document.
pub fn load_home_template(document: &str) -> Result<HomeTemplate, ModelError> {
    HomeTemplate::from_json(document)
}
