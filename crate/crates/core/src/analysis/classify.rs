//! Rule cascade assigning a failure class to an invalid routine.
//!
//! Rules are tried in a fixed order and the first match wins:
//!
//! 1. no parseable JSON                                   → Other
//! 2. an entity that does not exist in the home           → DeviceHallucinated
//! 3. a targeted appliance outside the category's set     → DeviceExtra
//! 4. a non-literal trigger value (sunset, "hot", ...)    → SensorTriggerValue
//! 5. a service the targeted appliance does not offer     → DeviceNoOptionExists
//! 6. an unsettable attribute or out-of-range value       → DeviceSetting
//! 7. an enum attribute set to a value it does not offer  → DeviceOptionExists
//! 8. a trigger sensor of a non-preferred type while a
//!    preferred one exists in the home                    → SensorSuboptimalChoice
//! 9. anything else                                       → Other

use serde_json::Value;

use super::record::{FailureClass, RunRecord};
use super::targets::{entities_in, entity_ids_of, referenced_entities, section_items, targeted_entities, Section};
use crate::commands::CommandCategory;
use crate::error::AnalysisError;
use crate::home::{AttributeDomain, HomeTemplate};
use crate::validate::is_hms;

const TIME_KEYS: &[&str] = &["at", "after", "before"];
const NUMERIC_KEYS: &[&str] = &["above", "below"];

/// Assign exactly one failure class to an invalid record.
pub fn classify_failure(
    record: &RunRecord,
    template: &HomeTemplate,
    categories: &[CommandCategory],
) -> Result<FailureClass, AnalysisError> {
    if record.json_validity {
        return Err(AnalysisError::PreconditionViolated);
    }
    let Some(doc) = record.parsed_json() else {
        return Ok(FailureClass::Other);
    };
    let category = categories.iter().find(|c| c.name == record.category);
    Ok(classify_document(&doc, template, category))
}

/// The cascade over a parsed routine document.
pub fn classify_document(
    doc: &Value,
    template: &HomeTemplate,
    category: Option<&CommandCategory>,
) -> FailureClass {
    if referenced_entities(doc)
        .iter()
        .any(|id| !template.contains_entity(id))
    {
        return FailureClass::DeviceHallucinated;
    }

    let targeted = targeted_entities(doc);
    if let Some(cat) = category {
        let extra = targeted
            .iter()
            .filter_map(|id| template.appliance(id))
            .any(|a| !cat.is_relevant(&a.appliance_type));
        if extra {
            return FailureClass::DeviceExtra;
        }
    }

    if has_bad_trigger_value(doc) {
        return FailureClass::SensorTriggerValue;
    }

    let calls = service_calls(doc, template);
    if calls
        .iter()
        .any(|c| c.service.is_some_and(|s| !c.appliance.supports_service(s)))
    {
        return FailureClass::DeviceNoOptionExists;
    }

    let mut option_violation = false;
    for call in &calls {
        for &(attr, value) in &call.data {
            match call.appliance.capabilities.attributes.get(attr) {
                None => return FailureClass::DeviceSetting,
                Some(domain @ AttributeDomain::Range { .. }) if !domain.accepts(value) => {
                    return FailureClass::DeviceSetting
                }
                Some(domain @ AttributeDomain::Options { .. }) if !domain.accepts(value) => {
                    option_violation = true
                }
                Some(_) => {}
            }
        }
    }
    if option_violation {
        return FailureClass::DeviceOptionExists;
    }

    if let Some(cat) = category {
        let preferred = &cat.preferred_sensor_types;
        let home_has_preferred = preferred.iter().any(|t| template.has_sensor_type(*t));
        let mut observed = entities_in(doc, Section::Trigger);
        observed.extend(entities_in(doc, Section::Condition));
        let suboptimal = home_has_preferred
            && observed
                .iter()
                .filter_map(|id| template.sensor(id))
                .any(|s| !preferred.contains(&s.sensor_type));
        if suboptimal {
            return FailureClass::SensorSuboptimalChoice;
        }
    }

    FailureClass::Other
}

fn has_bad_trigger_value(doc: &Value) -> bool {
    let mut items = section_items(doc, Section::Trigger);
    items.extend(section_items(doc, Section::Condition));
    items.iter().filter_map(|i| i.as_object()).any(|obj| {
        let bad_time = TIME_KEYS.iter().any(|k| match obj.get(*k) {
            Some(Value::String(s)) => {
                // sun conditions legitimately use sunrise/sunset for after/before
                let sun_condition = obj.get("condition").and_then(Value::as_str) == Some("sun");
                !(is_hms(s) || sun_condition && (s == "sunrise" || s == "sunset"))
            }
            _ => false,
        });
        let bad_number = NUMERIC_KEYS.iter().any(|k| match obj.get(*k) {
            Some(Value::String(s)) => s.trim().parse::<f64>().is_err(),
            Some(Value::Number(_)) | None => false,
            Some(_) => true,
        });
        bad_time || bad_number
    })
}

struct ServiceCall<'a> {
    service: Option<&'a str>,
    appliance: &'a crate::home::Appliance,
    data: Vec<(&'a String, &'a Value)>,
}

/// Service calls paired with each known appliance they target.
fn service_calls<'a>(doc: &'a Value, template: &'a HomeTemplate) -> Vec<ServiceCall<'a>> {
    let mut calls = Vec::new();
    for item in section_items(doc, Section::Action) {
        let Some(obj) = item.as_object() else { continue };
        let service = obj
            .get("service")
            .or_else(|| obj.get("action"))
            .and_then(Value::as_str);
        let data: Vec<(&String, &Value)> = obj
            .get("data")
            .and_then(Value::as_object)
            .map(|d| d.iter().collect())
            .unwrap_or_default();
        for id in entity_ids_of(item) {
            if let Some(appliance) = template.appliance(&id) {
                calls.push(ServiceCall {
                    service,
                    appliance,
                    data: data.clone(),
                });
            }
        }
    }
    calls
}
