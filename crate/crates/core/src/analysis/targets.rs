//! Entity references inside a (possibly malformed) routine document.

use std::collections::BTreeSet;

use serde_json::Value;

/// Where in the routine a reference appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Trigger,
    Condition,
    Action,
}

const TRIGGER_KEYS: &[&str] = &["trigger", "triggers"];
const CONDITION_KEYS: &[&str] = &["condition", "conditions"];
const ACTION_KEYS: &[&str] = &["action", "actions"];

fn section_of(key: &str) -> Option<Section> {
    if TRIGGER_KEYS.contains(&key) {
        Some(Section::Trigger)
    } else if CONDITION_KEYS.contains(&key) {
        Some(Section::Condition)
    } else if ACTION_KEYS.contains(&key) {
        Some(Section::Action)
    } else {
        None
    }
}

fn push_ids(value: &Value, out: &mut Vec<String>) {
    match value {
        Value::String(s) => out.extend(
            s.split(',')
                .map(str::trim)
                .filter(|id| !id.is_empty() && *id != "all" && *id != "none")
                .map(str::to_string),
        ),
        Value::Array(items) => items.iter().for_each(|v| push_ids(v, out)),
        _ => {}
    }
}

fn collect_entity_ids(value: &Value, out: &mut Vec<String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                if k == "entity_id" {
                    push_ids(v, out);
                } else {
                    collect_entity_ids(v, out);
                }
            }
        }
        Value::Array(items) => items.iter().for_each(|v| collect_entity_ids(v, out)),
        _ => {}
    }
}

/// Entity ids referenced anywhere inside one item.
pub fn entity_ids_of(item: &Value) -> Vec<String> {
    let mut ids = Vec::new();
    collect_entity_ids(item, &mut ids);
    let mut seen = BTreeSet::new();
    ids.retain(|id| seen.insert(id.clone()));
    ids
}

/// Top-level routine objects: the document itself, or each element when the
/// model returned a list of routines.
fn routines(doc: &Value) -> Vec<&serde_json::Map<String, Value>> {
    match doc {
        Value::Object(map) => vec![map],
        Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
        _ => vec![],
    }
}

/// Section items (trigger dicts, action dicts, ...) of the routine.
pub fn section_items(doc: &Value, section: Section) -> Vec<&Value> {
    let mut items = Vec::new();
    for routine in routines(doc) {
        for (k, v) in routine {
            if section_of(k) == Some(section) {
                match v {
                    Value::Array(list) => items.extend(list.iter()),
                    other => items.push(other),
                }
            }
        }
    }
    items
}

/// Entity ids referenced in one section, in document order, deduplicated.
pub fn entities_in(doc: &Value, section: Section) -> Vec<String> {
    let mut ids = Vec::new();
    for item in section_items(doc, section) {
        collect_entity_ids(item, &mut ids);
    }
    let mut seen = BTreeSet::new();
    ids.retain(|id| seen.insert(id.clone()));
    ids
}

/// Entities the routine acts on.
pub fn targeted_entities(doc: &Value) -> Vec<String> {
    entities_in(doc, Section::Action)
}

/// Every entity referenced anywhere in the routine.
pub fn referenced_entities(doc: &Value) -> Vec<String> {
    let mut ids = Vec::new();
    for routine in routines(doc) {
        collect_entity_ids(&Value::Object(routine.clone()), &mut ids);
    }
    let mut seen = BTreeSet::new();
    ids.retain(|id| seen.insert(id.clone()));
    ids
}
