//! Golden corpora for the validator and the failure classifier.
//!
//! Labels in `fixtures/corpus` were assigned by hand; these helpers only
//! replay them and report disagreements.

#![allow(dead_code)]

use std::path::PathBuf;

use ecomate_core::analysis::{classify_failure, FailureClass, RunRecord};
use ecomate_core::validate::{validate_offline, ValidationStatus};
use ecomate_core::{load_home_template, CommandDataset, GoalType, HomeTemplate, PromptVariant};
use serde::Deserialize;

pub const HA_REFERENCE_MESSAGES: [&str; 3] = [
    "Error while parsing the automation: SyntaxError: Unexpected token c in JSON at position 0",
    "Message malformed: extra keys not allowed @ data['below']",
    "Error while parsing the automation: SyntaxError: Unexpected token ; in JSON at position 61",
];

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn h107() -> HomeTemplate {
    load_home_template(&std::fs::read_to_string(fixtures_dir().join("h107.json")).unwrap()).unwrap()
}

pub fn commands() -> CommandDataset {
    CommandDataset::from_json(&std::fs::read_to_string(fixtures_dir().join("commands.json")).unwrap()).unwrap()
}

#[derive(Debug, Deserialize)]
pub struct ValidatorItem {
    pub id: String,
    pub text: String,
    pub status: ValidationStatus,
    pub message: String,
}

#[derive(Debug, Deserialize)]
struct ValidatorCorpus {
    strict_entities: bool,
    items: Vec<ValidatorItem>,
}

#[derive(Debug, Deserialize)]
pub struct FailureItem {
    pub id: String,
    pub category: String,
    pub json: Option<String>,
    #[serde(default)]
    pub output: Option<String>,
    pub label: String,
}

#[derive(Debug, Deserialize)]
struct FailureCorpus {
    items: Vec<FailureItem>,
}

pub fn validator_items() -> (bool, Vec<ValidatorItem>) {
    let text = std::fs::read_to_string(fixtures_dir().join("corpus/validator.json")).unwrap();
    let corpus: ValidatorCorpus = serde_json::from_str(&text).unwrap();
    (corpus.strict_entities, corpus.items)
}

pub fn failure_items() -> Vec<FailureItem> {
    let text = std::fs::read_to_string(fixtures_dir().join("corpus/failures.json")).unwrap();
    serde_json::from_str::<FailureCorpus>(&text).unwrap().items
}

pub struct Agreement {
    pub total: usize,
    pub status_disagreements: Vec<String>,
    pub message_disagreements: Vec<String>,
}

/// Replay every validator item against the offline validator.
pub fn validator_agreement() -> Agreement {
    let home = h107();
    let (strict, items) = validator_items();
    let mut status_disagreements = Vec::new();
    let mut message_disagreements = Vec::new();
    for item in &items {
        let got = validate_offline(&item.text, &home, strict);
        if got.status != item.status {
            status_disagreements.push(format!("{}: expected {}, got {} ({})", item.id, item.status, got.status, got.message));
        }
        if got.message != item.message {
            message_disagreements.push(format!("{}: expected {:?}, got {:?}", item.id, item.message, got.message));
        }
    }
    Agreement {
        total: items.len(),
        status_disagreements,
        message_disagreements,
    }
}

pub fn failure_record(item: &FailureItem, home: &HomeTemplate) -> RunRecord {
    let json_validity = item
        .json
        .as_deref()
        .is_some_and(|j| validate_offline(j, home, true).is_valid());
    RunRecord {
        user_command: item.id.clone(),
        goal_type: GoalType::Immediate,
        category: item.category.clone(),
        llm: "corpus".into(),
        prompt: PromptVariant::NoGreen,
        temperature: 0.0,
        output: item.output.clone().or_else(|| item.json.clone()).unwrap_or_default(),
        json: item.json.clone(),
        latency_ms: 0,
        json_validity,
        ha_response: String::new(),
        failure_class: None,
        explanation_over_budget: false,
    }
}

pub struct ClassifierRun {
    pub total: usize,
    pub diffs: Vec<String>,
    /// Golden label counts, most frequent first (ties by class order).
    pub label_counts: Vec<(FailureClass, usize)>,
}

/// Classify every failure item and compare with its golden label.
pub fn classifier_regression() -> ClassifierRun {
    let home = h107();
    let categories = commands().categories;
    let items = failure_items();
    let mut diffs = Vec::new();
    let mut counts = std::collections::BTreeMap::<FailureClass, usize>::new();
    for item in &items {
        let Some(expected) = FailureClass::parse(&item.label) else {
            diffs.push(format!("{}: unknown label {}", item.id, item.label));
            continue;
        };
        *counts.entry(expected).or_default() += 1;
        let record = failure_record(item, &home);
        match classify_failure(&record, &home, &categories) {
            Ok(got) if got == expected => {}
            Ok(got) => diffs.push(format!("{}: expected {}, got {}", item.id, expected.id(), got.id())),
            Err(e) => diffs.push(format!("{}: {e}", item.id)),
        }
    }
    let mut label_counts: Vec<_> = counts.into_iter().collect();
    label_counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ClassifierRun {
        total: items.len(),
        diffs,
        label_counts,
    }
}
