//! Declarative smart-home model: rooms, appliances and sensors.
//!
//! A [`HomeTemplate`] is both the "home template" block handed to the model
//! and the entity universe the validator and the analysis code check against.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::canonical::serialize_canonical;
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomeTemplate {
    pub id: String,
    pub rooms: Vec<Room>,
    pub appliances: Vec<Appliance>,
    pub sensors: Vec<Sensor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Appliance {
    pub entity_id: String,
    pub name: String,
    pub appliance_type: String,
    pub room_id: String,
    pub avg_power_watts: f64,
    pub capabilities: Capabilities,
}

/// Services an appliance answers to and the attributes those services can set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Capabilities {
    pub services: BTreeSet<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, AttributeDomain>,
}

/// Legal values of a settable attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeDomain {
    Range { min: f64, max: f64 },
    Options { options: Vec<String> },
}

impl AttributeDomain {
    pub fn accepts(&self, value: &serde_json::Value) -> bool {
        match self {
            AttributeDomain::Range { min, max } => value
                .as_f64()
                .map(|v| v >= *min && v <= *max)
                .unwrap_or(false),
            AttributeDomain::Options { options } => value
                .as_str()
                .map(|s| options.iter().any(|o| o == s))
                .unwrap_or(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sensor {
    pub entity_id: String,
    pub sensor_type: SensorType,
    pub room_id: String,
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorType {
    Motion,
    Temperature,
    Luminance,
    Door,
    Power,
}

impl SensorType {
    /// Unit a sensor of this type must report in, when one is fixed.
    pub fn required_unit(self) -> Option<&'static str> {
        match self {
            SensorType::Temperature => Some("°C"),
            SensorType::Power => Some("W"),
            SensorType::Luminance => Some("lx"),
            SensorType::Motion | SensorType::Door => None,
        }
    }
}

impl fmt::Display for SensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SensorType::Motion => "motion",
            SensorType::Temperature => "temperature",
            SensorType::Luminance => "luminance",
            SensorType::Door => "door",
            SensorType::Power => "power",
        };
        f.write_str(s)
    }
}

/// Something in the home that an entity id resolves to.
#[derive(Debug, Clone, Copy)]
pub enum Entity<'a> {
    Appliance(&'a Appliance),
    Sensor(&'a Sensor),
}

/// `<domain>.<object_id>` with lowercase domain and `[a-z0-9_]` object id.
pub fn is_valid_entity_id(entity_id: &str) -> bool {
    let Some((domain, object)) = entity_id.split_once('.') else {
        return false;
    };
    !domain.is_empty()
        && !object.is_empty()
        && domain.bytes().all(|b| b.is_ascii_lowercase() || b == b'_')
        && object
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Domain part of an entity id or service name.
pub fn domain_of(name: &str) -> &str {
    name.split_once('.').map(|(d, _)| d).unwrap_or(name)
}

impl Appliance {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !is_valid_entity_id(&self.entity_id) {
            return Err(ModelError::schema(format!(
                "bad entity_id '{}'",
                self.entity_id
            )));
        }
        if self.name.trim().is_empty() {
            return Err(ModelError::schema(format!(
                "appliance '{}' has an empty name",
                self.entity_id
            )));
        }
        if self.appliance_type.trim().is_empty() {
            return Err(ModelError::schema(format!(
                "appliance '{}' has an empty appliance_type",
                self.entity_id
            )));
        }
        if !(self.avg_power_watts.is_finite() && self.avg_power_watts >= 0.0) {
            return Err(ModelError::schema(format!(
                "appliance '{}' has invalid avg_power_watts {}",
                self.entity_id, self.avg_power_watts
            )));
        }
        if self.capabilities.services.is_empty() {
            return Err(ModelError::schema(format!(
                "appliance '{}' declares no capabilities",
                self.entity_id
            )));
        }
        Ok(())
    }

    pub fn supports_service(&self, service: &str) -> bool {
        self.capabilities.services.contains(service)
    }
}

impl Sensor {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !is_valid_entity_id(&self.entity_id) {
            return Err(ModelError::schema(format!(
                "bad entity_id '{}'",
                self.entity_id
            )));
        }
        if let Some(unit) = self.sensor_type.required_unit() {
            if self.unit != unit {
                return Err(ModelError::schema(format!(
                    "{} sensor '{}' must report in {unit}, found '{}'",
                    self.sensor_type, self.entity_id, self.unit
                )));
            }
        }
        Ok(())
    }
}

impl HomeTemplate {
    /// Parse and check a home template document.
    pub fn from_json(document: &str) -> Result<Self, ModelError> {
        let template: HomeTemplate = serde_json::from_str(document).map_err(|e| {
            if e.is_data() {
                ModelError::Schema(e.to_string())
            } else {
                ModelError::Parse(e.to_string())
            }
        })?;
        template.validate()?;
        Ok(template)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut room_ids = HashSet::new();
        for room in &self.rooms {
            if room.id.is_empty() {
                return Err(ModelError::schema("room with empty id"));
            }
            if !room_ids.insert(room.id.as_str()) {
                return Err(ModelError::schema(format!("duplicate room id '{}'", room.id)));
            }
        }

        let mut entity_ids = HashSet::new();
        let check_room = |entity: &str, room: &str| {
            if room_ids.contains(room) {
                Ok(())
            } else {
                Err(ModelError::schema(format!(
                    "'{entity}' references unknown room '{room}'"
                )))
            }
        };
        for appliance in &self.appliances {
            appliance.validate()?;
            check_room(&appliance.entity_id, &appliance.room_id)?;
            if !entity_ids.insert(appliance.entity_id.as_str()) {
                return Err(ModelError::schema(format!(
                    "duplicate entity id '{}'",
                    appliance.entity_id
                )));
            }
        }
        for sensor in &self.sensors {
            sensor.validate()?;
            check_room(&sensor.entity_id, &sensor.room_id)?;
            if !entity_ids.insert(sensor.entity_id.as_str()) {
                return Err(ModelError::schema(format!(
                    "duplicate entity id '{}'",
                    sensor.entity_id
                )));
            }
        }
        Ok(())
    }

    /// Deterministic sorted-key JSON form.
    pub fn to_canonical_json(&self) -> String {
        serialize_canonical(self)
    }

    pub fn entity(&self, entity_id: &str) -> Option<Entity<'_>> {
        self.appliance(entity_id)
            .map(Entity::Appliance)
            .or_else(|| self.sensor(entity_id).map(Entity::Sensor))
    }

    pub fn appliance(&self, entity_id: &str) -> Option<&Appliance> {
        self.appliances.iter().find(|a| a.entity_id == entity_id)
    }

    pub fn sensor(&self, entity_id: &str) -> Option<&Sensor> {
        self.sensors.iter().find(|s| s.entity_id == entity_id)
    }

    pub fn contains_entity(&self, entity_id: &str) -> bool {
        self.entity(entity_id).is_some()
    }

    /// Distinct appliance types present in the home, sorted.
    pub fn appliance_types(&self) -> BTreeSet<&str> {
        self.appliances
            .iter()
            .map(|a| a.appliance_type.as_str())
            .collect()
    }

    pub fn has_sensor_type(&self, sensor_type: SensorType) -> bool {
        self.sensors.iter().any(|s| s.sensor_type == sensor_type)
    }

    /// Whether any appliance anywhere in the home offers `service`.
    pub fn offers_service(&self, service: &str) -> bool {
        self.appliances.iter().any(|a| a.supports_service(service))
    }

    pub fn appliances_in_room<'a>(&'a self, room_id: &'a str) -> impl Iterator<Item = &'a Appliance> {
        self.appliances.iter().filter(move |a| a.room_id == room_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn light(entity_id: &str, room: &str) -> serde_json::Value {
        serde_json::json!({
            "entity_id": entity_id,
            "name": "Light",
            "appliance_type": "lightbulb",
            "room_id": room,
            "avg_power_watts": 9.0,
            "capabilities": {"services": ["light.turn_on", "light.turn_off"]}
        })
    }

    fn doc(appliances: Vec<serde_json::Value>) -> String {
        serde_json::json!({
            "id": "t",
            "rooms": [{"id": "kitchen", "name": "Kitchen"}],
            "appliances": appliances,
            "sensors": []
        })
        .to_string()
    }

    #[test]
    fn empty_template_is_valid() {
        let t = HomeTemplate::from_json(r#"{"id":"empty","rooms":[],"appliances":[],"sensors":[]}"#)
            .unwrap();
        assert!(t.appliances.is_empty());
    }

    #[test]
    fn dangling_room_is_schema_error() {
        let err = HomeTemplate::from_json(&doc(vec![light("light.garage", "garage")])).unwrap_err();
        assert!(matches!(err, ModelError::Schema(msg) if msg.contains("garage")));
    }

    #[test]
    fn duplicate_entity_is_schema_error() {
        let err = HomeTemplate::from_json(&doc(vec![
            light("light.kitchen", "kitchen"),
            light("light.kitchen", "kitchen"),
        ]))
        .unwrap_err();
        assert!(matches!(err, ModelError::Schema(_)));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        let err = HomeTemplate::from_json("{\"id\": ").unwrap_err();
        assert!(matches!(err, ModelError::Parse(_)));
    }

    #[test]
    fn bad_entity_ids_rejected() {
        for bad in ["Light.kitchen", "light", "light.", ".kitchen", "light.kit-chen", "li ght.x"] {
            assert!(!is_valid_entity_id(bad), "{bad}");
        }
        assert!(is_valid_entity_id("media_player.speaker_2"));
        let err = HomeTemplate::from_json(&doc(vec![light("Light.Kitchen", "kitchen")])).unwrap_err();
        assert!(matches!(err, ModelError::Schema(_)));
    }

    #[test]
    fn temperature_sensor_unit_enforced() {
        let s = Sensor {
            entity_id: "sensor.t".into(),
            sensor_type: SensorType::Temperature,
            room_id: "kitchen".into(),
            unit: "F".into(),
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn negative_power_rejected() {
        let mut a = light("light.kitchen", "kitchen");
        a["avg_power_watts"] = serde_json::json!(-1.0);
        assert!(HomeTemplate::from_json(&doc(vec![a])).is_err());
    }

    #[test]
    fn attribute_domains() {
        let range = AttributeDomain::Range { min: 0.0, max: 100.0 };
        assert!(range.accepts(&serde_json::json!(50)));
        assert!(!range.accepts(&serde_json::json!(150)));
        assert!(!range.accepts(&serde_json::json!("50")));
        let opts = AttributeDomain::Options {
            options: vec!["auto".into(), "sleep".into()],
        };
        assert!(opts.accepts(&serde_json::json!("sleep")));
        assert!(!opts.accepts(&serde_json::json!("turbo")));
    }
}
