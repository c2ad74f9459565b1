//! Appliance energy profile built from household annotation tables.
//!
//! Annotation exports differ in their header spelling, so columns are matched
//! through an alias table after normalization (trim, lowercase, spaces and
//! dashes folded to underscores, parenthesised units dropped).

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical::serialize_canonical;
use crate::error::ModelError;

const TYPE_ALIASES: &[&str] = &["appliance_type", "appliance", "device", "device_type", "type", "label"];
const POWER_ALIASES: &[&str] = &["power_watts", "power", "watts", "power_w", "consumption_w", "avg_power"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEntry {
    pub mean_power_watts: f64,
    pub sample_count: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub entries: BTreeMap<String, EnergyEntry>,
}

impl EnergyProfile {
    pub fn get(&self, appliance_type: &str) -> Option<&EnergyEntry> {
        self.entries.get(&appliance_type.to_lowercase())
    }

    pub fn to_canonical_json(&self) -> String {
        serialize_canonical(self)
    }

    /// Appliance types from `types` with no profile entry.
    pub fn missing_types<'a>(&self, types: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
        types.into_iter().filter(|t| self.get(t).is_none()).collect()
    }
}

/// One annotation row after column mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRow {
    pub appliance_type: String,
    pub power_watts: f64,
}

/// Rows of one annotation file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationTable {
    pub rows: Vec<AnnotationRow>,
}

fn normalize_header(raw: &str) -> String {
    let without_unit = match raw.find('(') {
        Some(idx) => &raw[..idx],
        None => raw,
    };
    without_unit
        .trim()
        .trim_start_matches('\u{feff}')
        .to_lowercase()
        .replace([' ', '-'], "_")
}

fn find_column(headers: &[String], aliases: &[&str]) -> Option<usize> {
    aliases
        .iter()
        .find_map(|alias| headers.iter().position(|h| h == alias))
}

impl AnnotationTable {
    pub fn from_rows(rows: impl IntoIterator<Item = (impl Into<String>, f64)>) -> Self {
        Self {
            rows: rows
                .into_iter()
                .map(|(t, p)| AnnotationRow {
                    appliance_type: t.into(),
                    power_watts: p,
                })
                .collect(),
        }
    }

    /// Parse a CSV annotation export. A header row is required.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, ModelError> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = csv
            .headers()
            .map_err(|e| ModelError::Parse(e.to_string()))?
            .iter()
            .map(normalize_header)
            .collect();
        let type_col = find_column(&headers, TYPE_ALIASES).ok_or_else(|| {
            ModelError::schema(format!("no appliance type column among {headers:?}"))
        })?;
        let power_col = find_column(&headers, POWER_ALIASES)
            .ok_or_else(|| ModelError::schema(format!("no power column among {headers:?}")))?;

        let mut rows = Vec::new();
        for (line, record) in csv.records().enumerate() {
            let record = record.map_err(|e| ModelError::Parse(e.to_string()))?;
            let appliance_type = record.get(type_col).unwrap_or_default().to_string();
            let raw_power = record.get(power_col).unwrap_or_default();
            if appliance_type.is_empty() && raw_power.is_empty() {
                continue;
            }
            let power_watts: f64 = raw_power.parse().map_err(|_| {
                ModelError::Parse(format!("row {}: bad power value '{raw_power}'", line + 2))
            })?;
            rows.push(AnnotationRow {
                appliance_type,
                power_watts,
            });
        }
        Ok(Self { rows })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| ModelError::Parse(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv(file)
    }
}

/// Concatenate annotation tables and average the power per appliance type.
pub fn ingest_energy_annotations(tables: &[AnnotationTable]) -> Result<EnergyProfile, ModelError> {
    let mut samples: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in tables.iter().flat_map(|t| &t.rows) {
        if row.power_watts < 0.0 || !row.power_watts.is_finite() {
            return Err(ModelError::NegativePower {
                appliance_type: row.appliance_type.clone(),
                power_watts: row.power_watts,
            });
        }
        samples
            .entry(row.appliance_type.trim().to_lowercase())
            .or_default()
            .push(row.power_watts);
    }
    if samples.is_empty() {
        return Err(ModelError::EmptyInput);
    }

    let entries = samples
        .into_iter()
        .map(|(kind, mut values)| {
            // summation order fixed so row order never changes the mean
            values.sort_by(f64::total_cmp);
            let sum: f64 = values.iter().sum();
            let entry = EnergyEntry {
                mean_power_watts: sum / values.len() as f64,
                sample_count: values.len() as u64,
            };
            (kind, entry)
        })
        .collect();
    Ok(EnergyProfile { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_mean_per_type() {
        let p = ingest_energy_annotations(&[AnnotationTable::from_rows([
            ("television", 100.0),
            ("television", 200.0),
        ])])
        .unwrap();
        let tv = p.get("television").unwrap();
        assert_eq!(tv.mean_power_watts, 150.0);
        assert_eq!(tv.sample_count, 2);
    }

    #[test]
    fn files_are_concatenated() {
        let one = AnnotationTable::from_rows([("kettle", 2000.0)]);
        let p = ingest_energy_annotations(&[one.clone(), one]).unwrap();
        let k = p.get("kettle").unwrap();
        assert_eq!(k.mean_power_watts, 2000.0);
        assert_eq!(k.sample_count, 2);
    }

    #[test]
    fn negative_power_rejected() {
        let err = ingest_energy_annotations(&[AnnotationTable::from_rows([("tv", -5.0)])]).unwrap_err();
        assert!(matches!(err, ModelError::NegativePower { .. }));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            ingest_energy_annotations(&[AnnotationTable::default()]),
            Err(ModelError::EmptyInput)
        ));
        assert!(matches!(ingest_energy_annotations(&[]), Err(ModelError::EmptyInput)));
    }

    #[test]
    fn keys_lowercased() {
        let p = ingest_energy_annotations(&[AnnotationTable::from_rows([("Television", 80.0)])]).unwrap();
        assert!(p.entries.contains_key("television"));
    }

    #[test]
    fn header_aliases() {
        let csv = "Device , Power (W)\nTelevision,120\n\nkettle , 1800.5\n";
        let t = AnnotationTable::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1].power_watts, 1800.5);

        let csv = "label,consumption-W\nfan,30\n";
        assert_eq!(AnnotationTable::from_csv(csv.as_bytes()).unwrap().rows.len(), 1);

        let err = AnnotationTable::from_csv("foo,bar\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, ModelError::Schema(_)));
    }
}
