//! Whitelist schema for HomeAssistant automation configs.
//!
//! Errors are reported the way HomeAssistant's config API words them: a
//! detail followed by `@ data['<key>']`, with the key relative to the item
//! (automation, trigger, condition or action) that failed. Only the first
//! error is reported.

use serde_json::{Map, Value};

use crate::home::{domain_of, is_valid_entity_id, HomeTemplate};

/// A schema violation: detail text plus the offending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaViolation {
    pub detail: String,
    pub key: String,
}

impl SchemaViolation {
    fn new(detail: impl Into<String>, key: impl Into<String>) -> Self {
        Self {
            detail: detail.into(),
            key: key.into(),
        }
    }

    fn for_value(detail: impl Into<String>, key: &str) -> Self {
        Self::new(format!("{} for dictionary value", detail.into()), key)
    }
}

type Check = Result<(), SchemaViolation>;

pub const TOP_LEVEL_KEYS: &[&str] = &["alias", "id", "description", "mode", "trigger", "condition", "action"];
pub const MODES: &[&str] = &["parallel", "queued", "restart", "single"];
pub const TRIGGER_PLATFORMS: &[&str] = &["device", "event", "numeric_state", "state", "sun", "time"];
pub const CONDITION_KINDS: &[&str] = &["and", "not", "numeric_state", "or", "state", "sun", "time"];
const WEEKDAYS: &[&str] = &["fri", "mon", "sat", "sun", "thu", "tue", "wed"];

/// Keys accepted on every trigger, condition or action item.
const COMMON_ITEM_KEYS: &[&str] = &["alias", "enabled", "id"];

struct Ctx<'a> {
    home: &'a HomeTemplate,
    strict: bool,
}

fn quoted_list(items: &[&str]) -> String {
    let inner: Vec<String> = items.iter().map(|s| format!("'{s}'")).collect();
    format!("[{}]", inner.join(", "))
}

/// `HH:MM:SS`, 24-hour clock.
pub fn is_hms(value: &str) -> bool {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 || parts.iter().any(|p| p.len() != 2 || !p.bytes().all(|b| b.is_ascii_digit())) {
        return false;
    }
    let n = |s: &str| s.parse::<u32>().unwrap_or(99);
    n(parts[0]) < 24 && n(parts[1]) < 60 && n(parts[2]) < 60
}

fn ensure_list<'v>(value: &'v Value, key: &str) -> Result<Vec<&'v Value>, SchemaViolation> {
    let items: Vec<&Value> = match value {
        Value::Array(items) => items.iter().collect(),
        Value::Object(_) => vec![value],
        _ => return Err(SchemaViolation::for_value("expected a list", key)),
    };
    Ok(items)
}

fn as_object<'v>(value: &'v Value, key: &str) -> Result<&'v Map<String, Value>, SchemaViolation> {
    value
        .as_object()
        .ok_or_else(|| SchemaViolation::new("expected a dictionary", key))
}

fn no_extra_keys(obj: &Map<String, Value>, allowed: &[&str]) -> Check {
    match obj
        .keys()
        .find(|k| !allowed.contains(&k.as_str()) && !COMMON_ITEM_KEYS.contains(&k.as_str()))
    {
        Some(extra) => Err(SchemaViolation::new("extra keys not allowed", extra.clone())),
        None => Ok(()),
    }
}

fn require(obj: &Map<String, Value>, key: &str) -> Check {
    if obj.contains_key(key) {
        Ok(())
    } else {
        Err(SchemaViolation::new("required key not provided", key))
    }
}

fn expect_str<'v>(obj: &'v Map<String, Value>, key: &str) -> Result<Option<&'v str>, SchemaViolation> {
    match obj.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(SchemaViolation::for_value("expected str", key)),
    }
}

fn expect_number(obj: &Map<String, Value>, key: &str) -> Check {
    match obj.get(key) {
        None => Ok(()),
        Some(Value::Number(_)) => Ok(()),
        Some(Value::String(s)) if s.trim().parse::<f64>().is_ok() => Ok(()),
        Some(_) => Err(SchemaViolation::for_value("expected float", key)),
    }
}

fn expect_time(obj: &Map<String, Value>, key: &str) -> Check {
    match obj.get(key) {
        None => Ok(()),
        Some(Value::String(s)) if is_hms(s) => Ok(()),
        Some(Value::String(s)) => Err(SchemaViolation::for_value(format!("Invalid time specified: {s}"), key)),
        Some(other) => Err(SchemaViolation::for_value(format!("Invalid time specified: {other}"), key)),
    }
}

fn expect_one_of(obj: &Map<String, Value>, key: &str, options: &[&str]) -> Check {
    match expect_str(obj, key)? {
        None => Ok(()),
        Some(s) if options.contains(&s) => Ok(()),
        Some(_) => Err(SchemaViolation::for_value(
            format!("value must be one of {}", quoted_list(options)),
            key,
        )),
    }
}

impl Ctx<'_> {
    /// Validate an `entity_id` value (string, comma list or list of strings).
    fn entity_ids(&self, value: &Value, key: &str) -> Result<Vec<String>, SchemaViolation> {
        let ids: Vec<String> = match value {
            Value::String(s) => s.split(',').map(|p| p.trim().to_string()).collect(),
            Value::Array(items) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| SchemaViolation::for_value("expected str", key))
                })
                .collect::<Result<_, _>>()?,
            _ => return Err(SchemaViolation::for_value("expected str", key)),
        };
        for id in &ids {
            if id == "all" || id == "none" {
                continue;
            }
            if !is_valid_entity_id(id) {
                return Err(SchemaViolation::for_value(
                    format!("Entity ID {id} is an invalid entity ID"),
                    key,
                ));
            }
            if self.strict && !self.home.contains_entity(id) {
                return Err(SchemaViolation::for_value(format!("Unknown entity {id}"), key));
            }
        }
        Ok(ids)
    }

    fn trigger(&self, item: &Value) -> Check {
        let obj = as_object(item, "trigger")?;
        require(obj, "platform")?;
        let platform = match obj.get("platform") {
            Some(Value::String(p)) if TRIGGER_PLATFORMS.contains(&p.as_str()) => p.as_str(),
            _ => {
                return Err(SchemaViolation::for_value(
                    format!("value must be one of {}", quoted_list(TRIGGER_PLATFORMS)),
                    "platform",
                ))
            }
        };
        match platform {
            "state" => {
                no_extra_keys(obj, &["platform", "entity_id", "from", "to", "for", "attribute"])?;
                require(obj, "entity_id")?;
                self.entity_ids(&obj["entity_id"], "entity_id")?;
                expect_time(obj, "for")
            }
            "numeric_state" => {
                no_extra_keys(
                    obj,
                    &["platform", "entity_id", "above", "below", "attribute", "for", "value_template"],
                )?;
                require(obj, "entity_id")?;
                self.entity_ids(&obj["entity_id"], "entity_id")?;
                if !obj.contains_key("above") && !obj.contains_key("below") {
                    return Err(SchemaViolation::new(
                        "must contain at least one of above, below",
                        "above",
                    ));
                }
                expect_number(obj, "above")?;
                expect_number(obj, "below")?;
                expect_time(obj, "for")
            }
            "time" => {
                no_extra_keys(obj, &["platform", "at"])?;
                require(obj, "at")?;
                match &obj["at"] {
                    Value::Array(items) => items.iter().try_for_each(|at| {
                        let mut single = Map::new();
                        single.insert("at".into(), at.clone());
                        expect_time(&single, "at")
                    }),
                    _ => expect_time(obj, "at"),
                }
            }
            "sun" => {
                no_extra_keys(obj, &["platform", "event", "offset"])?;
                require(obj, "event")?;
                expect_one_of(obj, "event", &["sunrise", "sunset"])?;
                if let Some(offset) = expect_str(obj, "offset")? {
                    let bare = offset.trim_start_matches(['-', '+']);
                    if !is_hms(bare) {
                        return Err(SchemaViolation::for_value(
                            format!("offset {offset} should be format 'HH:MM', 'HH:MM:SS' or 'HH:MM:SS.F'"),
                            "offset",
                        ));
                    }
                }
                Ok(())
            }
            "event" => {
                no_extra_keys(obj, &["platform", "event_type", "event_data"])?;
                require(obj, "event_type")?;
                expect_str(obj, "event_type")?;
                match obj.get("event_data") {
                    None | Some(Value::Object(_)) => Ok(()),
                    Some(_) => Err(SchemaViolation::for_value("expected a dictionary", "event_data")),
                }
            }
            "device" => {
                no_extra_keys(
                    obj,
                    &["platform", "device_id", "domain", "type", "subtype", "entity_id", "for", "above", "below"],
                )?;
                require(obj, "device_id")?;
                require(obj, "domain")?;
                require(obj, "type")?;
                if let Some(entity) = obj.get("entity_id") {
                    self.entity_ids(entity, "entity_id")?;
                }
                Ok(())
            }
            _ => unreachable!("platform checked above"),
        }
    }

    fn condition(&self, item: &Value) -> Check {
        let obj = as_object(item, "condition")?;
        require(obj, "condition")?;
        let kind = match obj.get("condition") {
            Some(Value::String(k)) if CONDITION_KINDS.contains(&k.as_str()) => k.as_str(),
            _ => {
                return Err(SchemaViolation::for_value(
                    format!("value must be one of {}", quoted_list(CONDITION_KINDS)),
                    "condition",
                ))
            }
        };
        match kind {
            "state" => {
                no_extra_keys(obj, &["condition", "entity_id", "state", "attribute", "for"])?;
                require(obj, "entity_id")?;
                require(obj, "state")?;
                self.entity_ids(&obj["entity_id"], "entity_id")?;
                expect_time(obj, "for")
            }
            "numeric_state" => {
                no_extra_keys(obj, &["condition", "entity_id", "above", "below", "attribute"])?;
                require(obj, "entity_id")?;
                self.entity_ids(&obj["entity_id"], "entity_id")?;
                if !obj.contains_key("above") && !obj.contains_key("below") {
                    return Err(SchemaViolation::new(
                        "must contain at least one of above, below",
                        "above",
                    ));
                }
                expect_number(obj, "above")?;
                expect_number(obj, "below")
            }
            "time" => {
                no_extra_keys(obj, &["condition", "after", "before", "weekday"])?;
                expect_time(obj, "after")?;
                expect_time(obj, "before")?;
                match obj.get("weekday") {
                    None => Ok(()),
                    Some(v) => {
                        let days: Vec<&Value> = match v {
                            Value::Array(items) => items.iter().collect(),
                            other => vec![other],
                        };
                        if days
                            .iter()
                            .all(|d| d.as_str().is_some_and(|d| WEEKDAYS.contains(&d)))
                        {
                            Ok(())
                        } else {
                            Err(SchemaViolation::for_value(
                                format!("value must be one of {}", quoted_list(WEEKDAYS)),
                                "weekday",
                            ))
                        }
                    }
                }
            }
            "sun" => {
                no_extra_keys(obj, &["condition", "after", "before", "after_offset", "before_offset"])?;
                expect_one_of(obj, "after", &["sunrise", "sunset"])?;
                expect_one_of(obj, "before", &["sunrise", "sunset"])
            }
            "and" | "or" | "not" => {
                no_extra_keys(obj, &["condition", "conditions"])?;
                require(obj, "conditions")?;
                for nested in ensure_list(&obj["conditions"], "conditions")? {
                    self.condition(nested)?;
                }
                Ok(())
            }
            _ => unreachable!("condition kind checked above"),
        }
    }

    fn action(&self, item: &Value) -> Check {
        let obj = as_object(item, "action")?;
        if obj.contains_key("service") {
            no_extra_keys(obj, &["service", "target", "entity_id", "data", "continue_on_error"])?;
            let service = expect_str(obj, "service")?.unwrap_or_default();
            let well_formed = service
                .split_once('.')
                .is_some_and(|(d, s)| is_valid_entity_id(&format!("{d}.{s}")));
            if !well_formed {
                return Err(SchemaViolation::for_value(
                    format!("Service {service} does not match format <domain>.<name>"),
                    "service",
                ));
            }

            let mut targets = Vec::new();
            if let Some(entity) = obj.get("entity_id") {
                targets.extend(self.entity_ids(entity, "entity_id")?);
            }
            if let Some(target) = obj.get("target") {
                let t = target
                    .as_object()
                    .ok_or_else(|| SchemaViolation::for_value("expected a dictionary", "target"))?;
                no_extra_keys(t, &["entity_id", "area_id", "device_id"])?;
                if let Some(entity) = t.get("entity_id") {
                    targets.extend(self.entity_ids(entity, "entity_id")?);
                }
            }
            match obj.get("data") {
                None | Some(Value::Object(_)) => {}
                Some(_) => return Err(SchemaViolation::for_value("expected a dictionary", "data")),
            }

            if self.strict {
                let service_domain = domain_of(service);
                if service_domain != "homeassistant" {
                    if let Some(bad) = targets
                        .iter()
                        .find(|t| *t != "all" && *t != "none" && domain_of(t) != service_domain)
                    {
                        return Err(SchemaViolation::for_value(
                            format!("Service {service} cannot target entity {bad}"),
                            "service",
                        ));
                    }
                }
            }
            Ok(())
        } else if obj.contains_key("delay") {
            no_extra_keys(obj, &["delay"])?;
            match &obj["delay"] {
                Value::Number(_) => Ok(()),
                Value::String(s) if is_hms(s) => Ok(()),
                Value::Object(parts) => {
                    no_extra_keys(parts, &["hours", "minutes", "seconds", "milliseconds", "days"])?;
                    parts.keys().try_for_each(|k| expect_number(parts, k))
                }
                other => Err(SchemaViolation::for_value(
                    format!("offset {} should be format 'HH:MM', 'HH:MM:SS' or 'HH:MM:SS.F'", other.as_str().unwrap_or("?")),
                    "delay",
                )),
            }
        } else if obj.contains_key("condition") {
            self.condition(item)
        } else {
            Err(SchemaViolation::new("Unable to determine action", "action"))
        }
    }

    fn automation(&self, value: &Value) -> Check {
        let obj = value
            .as_object()
            .ok_or_else(|| SchemaViolation::new("expected a dictionary", "config"))?;

        if let Some(extra) = obj.keys().find(|k| !TOP_LEVEL_KEYS.contains(&k.as_str())) {
            return Err(SchemaViolation::new("extra keys not allowed", extra.clone()));
        }
        for key in ["alias", "trigger", "action"] {
            require(obj, key)?;
        }

        match expect_str(obj, "alias")? {
            Some(alias) if alias.trim().is_empty() => {
                return Err(SchemaViolation::for_value("length of value must be at least 1", "alias"))
            }
            _ => {}
        }
        expect_str(obj, "id")?;
        expect_str(obj, "description")?;
        expect_one_of(obj, "mode", MODES)?;

        let triggers = ensure_list(&obj["trigger"], "trigger")?;
        if triggers.is_empty() {
            return Err(SchemaViolation::for_value("length of value must be at least 1", "trigger"));
        }
        triggers.into_iter().try_for_each(|t| self.trigger(t))?;

        if let Some(conditions) = obj.get("condition") {
            ensure_list(conditions, "condition")?
                .into_iter()
                .try_for_each(|c| self.condition(c))?;
        }

        let actions = ensure_list(&obj["action"], "action")?;
        if actions.is_empty() {
            return Err(SchemaViolation::for_value("length of value must be at least 1", "action"));
        }
        actions.into_iter().try_for_each(|a| self.action(a))
    }
}

/// Check a parsed automation document against the whitelist schema.
pub fn check_automation(value: &Value, home: &HomeTemplate, strict_entities: bool) -> Check {
    Ctx {
        home,
        strict: strict_entities,
    }
    .automation(value)
}
