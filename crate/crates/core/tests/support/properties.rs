//! Property suites over the metrics, similarity, extractor and validator.
//!
//! Each suite runs a deterministic proptest runner and returns the first
//! counterexample as an error string. The oracles here recount from the
//! generator's own description of each record, never from the code under
//! test.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ecomate_core::analysis::{
    pair_green_nogreen, relevance_score, similarity, summarize, FailureClass, RunRecord, SimilarityProvider,
    TrigramCosine,
};
use ecomate_core::canonical::to_canonical_string;
use ecomate_core::energy::{ingest_energy_annotations, AnnotationTable};
use ecomate_core::validate::{validate_offline, Automation, ValidationStatus};
use ecomate_core::{extract, CommandCategory, ExtractionMethod, GoalType, HomeTemplate, PromptVariant};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use serde_json::{json, Value};

pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

// ---- a tiny home and category registry ------------------------------------

pub fn small_home() -> HomeTemplate {
    serde_json::from_value(json!({
        "id": "prop",
        "rooms": [{"id": "r", "name": "R"}],
        "appliances": [
            {"entity_id": "light.a", "name": "A", "appliance_type": "lightbulb", "room_id": "r",
             "avg_power_watts": 9.0, "capabilities": {"services": ["light.turn_on", "light.turn_off"]}},
            {"entity_id": "light.b", "name": "B", "appliance_type": "lightbulb", "room_id": "r",
             "avg_power_watts": 9.0, "capabilities": {"services": ["light.turn_on", "light.turn_off"]}},
            {"entity_id": "vacuum.v", "name": "V", "appliance_type": "vacuum_cleaner", "room_id": "r",
             "avg_power_watts": 30.0, "capabilities": {"services": ["vacuum.start"]}}
        ],
        "sensors": [
            {"entity_id": "binary_sensor.m", "sensor_type": "motion", "room_id": "r", "unit": ""}
        ]
    }))
    .unwrap()
}

pub fn small_categories() -> Vec<CommandCategory> {
    serde_json::from_value(json!([
        {"name": "Lum", "relevant_appliance_types": ["lightbulb"]},
        {"name": "Robot", "relevant_appliance_types": ["vacuum_cleaner"]},
        {"name": "Temp", "relevant_appliance_types": ["thermostat"]}
    ]))
    .unwrap()
}

/// Relevant types per category, as the oracle knows them.
fn oracle_relevant(category: usize) -> &'static [&'static str] {
    match category {
        0 => &["light.a", "light.b"],
        1 => &["vacuum.v"],
        _ => &[],
    }
}

const ENTITY_POOL: &[&str] = &["light.a", "light.b", "vacuum.v", "binary_sensor.m", "fan.ghost"];
const CATEGORY_NAMES: &[&str] = &["Lum", "Robot", "Temp"];

/// Generator-side description of one record.
#[derive(Debug, Clone)]
pub struct RecordSpec {
    pub config: (usize, bool, bool),
    pub category: usize,
    /// 0 = no routine, 1 = unparseable routine, 2 = parseable routine.
    pub kind: u8,
    pub targets: Vec<usize>,
    pub valid: bool,
    pub latency: u64,
}

fn record_spec() -> impl Strategy<Value = RecordSpec> {
    (
        (0usize..2, any::<bool>(), any::<bool>()),
        0usize..3,
        0u8..3,
        prop::collection::vec(0usize..ENTITY_POOL.len(), 0..4),
        any::<bool>(),
        1u64..60_000,
    )
        .prop_map(|(config, category, kind, targets, valid, latency)| RecordSpec {
            config,
            category,
            kind,
            targets,
            valid,
            latency,
        })
}

pub fn build_record(spec: &RecordSpec, command: &str) -> RunRecord {
    let (llm, green, warm) = spec.config;
    let actions: Vec<Value> = spec
        .targets
        .iter()
        .map(|&t| json!({"service": "homeassistant.turn_off", "entity_id": ENTITY_POOL[t]}))
        .collect();
    let json = match spec.kind {
        0 => None,
        1 => Some("code: {\"alias\": ".to_string()),
        _ => Some(
            json!({"alias": "x", "trigger": [{"platform": "time", "at": "07:00:00"}], "action": actions}).to_string(),
        ),
    };
    RunRecord {
        user_command: command.to_string(),
        goal_type: GoalType::Immediate,
        category: CATEGORY_NAMES[spec.category].to_string(),
        llm: format!("llm{llm}"),
        prompt: if green { PromptVariant::Green } else { PromptVariant::NoGreen },
        temperature: if warm { 0.7 } else { 0.0 },
        output: json.clone().unwrap_or_else(|| "I cannot do that.".into()),
        json,
        latency_ms: spec.latency,
        json_validity: spec.valid,
        ha_response: String::new(),
        failure_class: (!spec.valid).then_some(FailureClass::Other),
        explanation_over_budget: false,
    }
}

// ---- Acc identity against a brute-force recount --------------------------

pub fn acc_identity(cases: u32) -> Result<(), String> {
    let home = small_home();
    let categories = small_categories();
    report(runner(cases).run(&prop::collection::vec(record_spec(), 1..16), |specs| {
        let records: Vec<RunRecord> = specs
            .iter()
            .enumerate()
            .map(|(i, s)| build_record(s, &format!("c{i}")))
            .collect();
        let summaries = summarize(&records, &home, &categories).map_err(|e| TestCaseError::fail(e.to_string()))?;

        let mut keys: Vec<(usize, bool, bool)> = Vec::new();
        for s in &specs {
            if !keys.contains(&s.config) {
                keys.push(s.config);
            }
        }
        prop_assert_eq!(summaries.len(), keys.len());
        for (summary, key) in summaries.iter().zip(&keys) {
            let group: Vec<&RecordSpec> = specs.iter().filter(|s| s.config == *key).collect();
            let n = group.len();
            let fp = group
                .iter()
                .filter(|s| s.category == 2 && s.kind == 2 && !s.targets.is_empty())
                .count();
            let fn_ = group.iter().filter(|s| s.category != 2 && s.kind == 0).count();
            let valid = group.iter().filter(|s| s.valid).count();

            prop_assert_eq!(summary.count, n);
            prop_assert_eq!(summary.fp_count, fp);
            prop_assert_eq!(summary.fn_count, fn_);
            prop_assert_eq!(summary.valid_count, valid);
            prop_assert_eq!(summary.fp, fp as f64 / n as f64);
            prop_assert_eq!(summary.fn_, fn_ as f64 / n as f64);
            prop_assert_eq!(summary.acc, 1.0 - (summary.fp + summary.fn_));
            prop_assert_eq!(summary.validity_pct, valid as f64 / n as f64);
            prop_assert_eq!(summary.latency_min_ms, group.iter().map(|s| s.latency).min().unwrap());
            prop_assert_eq!(summary.latency_max_ms, group.iter().map(|s| s.latency).max().unwrap());

            let rels: Vec<f64> = group
                .iter()
                .filter(|s| s.kind == 2)
                .map(|s| {
                    let distinct: BTreeSet<usize> = s.targets.iter().copied().collect();
                    let r = distinct
                        .iter()
                        .filter(|&&t| oracle_relevant(s.category).contains(&ENTITY_POOL[t]))
                        .count() as f64;
                    let i = distinct.len() as f64 - r;
                    if r + i == 0.0 {
                        0.0
                    } else {
                        (r - i) / (r + i)
                    }
                })
                .collect();
            let rel = if rels.is_empty() { 0.0 } else { rels.iter().sum::<f64>() / rels.len() as f64 };
            prop_assert!((summary.rel - rel).abs() < 1e-12, "rel {} vs {}", summary.rel, rel);
        }
        Ok(())
    }))
}

// ---- Rel bounds and extremes ---------------------------------------------

pub fn rel_bounds(cases: u32) -> Result<(), String> {
    let home = small_home();
    let categories = small_categories();
    let strategy = (0usize..3, prop::collection::vec(0usize..ENTITY_POOL.len(), 0..6));
    report(runner(cases).run(&strategy, |(category, targets)| {
        let actions: Vec<Value> = targets
            .iter()
            .map(|&t| json!({"service": "homeassistant.turn_on", "target": {"entity_id": ENTITY_POOL[t]}}))
            .collect();
        let doc = json!({"alias": "x", "trigger": [], "action": actions});
        let rel = relevance_score(&doc, &categories[category], &home);

        let distinct: BTreeSet<usize> = targets.iter().copied().collect();
        let r = distinct
            .iter()
            .filter(|&&t| oracle_relevant(category).contains(&ENTITY_POOL[t]))
            .count();
        let i = distinct.len() - r;
        prop_assert!((-1.0..=1.0).contains(&rel));
        prop_assert_eq!(rel == 1.0, i == 0 && r > 0);
        prop_assert_eq!(rel == -1.0, r == 0 && i > 0);
        if distinct.is_empty() {
            prop_assert_eq!(rel, 0.0);
        }
        Ok(())
    }))
}

// ---- Boolean difference antisymmetry -------------------------------------

pub fn boolean_difference_antisymmetry(cases: u32) -> Result<(), String> {
    let strategy = prop::collection::vec((record_spec(), record_spec()), 1..10);
    report(runner(cases).run(&strategy, |pairs| {
        let mut forward = Vec::new();
        let mut swapped = Vec::new();
        for (i, (a, b)) in pairs.iter().enumerate() {
            let mut a = a.clone();
            let mut b = b.clone();
            b.config = a.config;
            b.category = a.category;
            a.config.1 = true;
            b.config.1 = false;
            let cmd = format!("c{i}");
            let green = build_record(&a, &cmd);
            let plain = build_record(&b, &cmd);
            let mut green_as_plain = green.clone();
            green_as_plain.prompt = PromptVariant::NoGreen;
            let mut plain_as_green = plain.clone();
            plain_as_green.prompt = PromptVariant::Green;
            forward.extend([green, plain]);
            swapped.extend([plain_as_green, green_as_plain]);
        }
        let p = pair_green_nogreen(&forward, &TrigramCosine).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let q = pair_green_nogreen(&swapped, &TrigramCosine).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(p.len(), pairs.len());
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((-1..=1).contains(&x.boolean_difference));
            prop_assert_eq!(x.boolean_difference, -y.boolean_difference);
            prop_assert_eq!(x.latency_difference_ms, -y.latency_difference_ms);
            prop_assert!((x.similarity - y.similarity).abs() < 1e-12);
        }
        Ok(())
    }))
}

// ---- similarity -----------------------------------------------------------

pub fn json_value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::from),
        (-1000i64..1000).prop_map(Value::from),
        "[a-z_ .:0-9]{0,12}".prop_map(Value::from),
    ];
    leaf.prop_recursive(3, 24, 5, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..5).prop_map(Value::Array),
            prop::collection::btree_map("[a-z_]{1,8}", inner, 0..5)
                .prop_map(|m| Value::Object(m.into_iter().collect())),
        ]
    })
}

/// Serialize with object keys in reverse order and loose whitespace.
pub fn reordered(value: &Value) -> String {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.reverse();
            let parts: Vec<String> = entries
                .into_iter()
                .map(|(k, v)| format!("{} :  {}", Value::String(k.clone()), reordered(v)))
                .collect();
            format!("{{ {} }}", parts.join(" ,\n "))
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(reordered).collect();
            format!("[ {} ]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

pub fn similarity_properties(cases: u32) -> Result<(), String> {
    let provider = TrigramCosine;
    report(runner(cases).run(&(json_value(), json_value()), |(a, b)| {
        let sa = a.to_string();
        let sb = b.to_string();
        let ab = similarity(&sa, &sb, &provider).unwrap();
        let ba = similarity(&sb, &sa, &provider).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-12, "asymmetric: {} vs {}", ab, ba);
        prop_assert!((similarity(&sa, &sa, &provider).unwrap() - 1.0).abs() < 1e-9);
        let shuffled = reordered(&a);
        prop_assert!((similarity(&sa, &shuffled, &provider).unwrap() - 1.0).abs() < 1e-9);
        prop_assert!((provider.score(&shuffled, &sb) - ab).abs() < 1e-12);
        Ok(())
    }))
}

// ---- extractor ------------------------------------------------------------

/// One piece of a generated model reply.
#[derive(Debug, Clone)]
pub enum Segment {
    Prose(String),
    Fenced { tag: bool, body: FencedBody },
    Bare(Value),
}

#[derive(Debug, Clone)]
pub enum FencedBody {
    Object(Value),
    Array(Value),
    Junk(String),
}

fn object_value() -> impl Strategy<Value = Value> {
    prop::collection::btree_map("[a-z_]{1,8}", json_value(), 1..4).prop_map(|m| Value::Object(m.into_iter().collect()))
}

fn segment() -> impl Strategy<Value = Segment> {
    prop_oneof![
        3 => "[A-Za-z ,.:!?'\n]{0,40}".prop_map(Segment::Prose),
        2 => (any::<bool>(), object_value()).prop_map(|(tag, v)| Segment::Fenced { tag, body: FencedBody::Object(v) }),
        1 => (any::<bool>(), prop::collection::vec(json_value(), 0..3))
            .prop_map(|(tag, v)| Segment::Fenced { tag, body: FencedBody::Array(Value::Array(v)) }),
        1 => (any::<bool>(), "(alias: [a-z]{1,6}\n  trigger: [a-z]{1,6}|def [a-z]{1,6}\\(\\): pass)")
            .prop_map(|(tag, s)| Segment::Fenced { tag, body: FencedBody::Junk(s) }),
        1 => object_value().prop_map(Segment::Bare),
    ]
}

pub fn render(segments: &[Segment]) -> String {
    let mut out = String::new();
    for s in segments {
        match s {
            Segment::Prose(p) => out.push_str(p),
            Segment::Fenced { tag, body } => {
                let text = match body {
                    FencedBody::Object(v) | FencedBody::Array(v) => serde_json::to_string_pretty(v).unwrap(),
                    FencedBody::Junk(j) => j.clone(),
                };
                out.push_str(&format!("\n```{}\n{}\n```\n", if *tag { "json" } else { "" }, text));
            }
            Segment::Bare(v) => out.push_str(&format!(" {v} ")),
        }
    }
    out
}

pub fn extractor_properties(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&prop::collection::vec(segment(), 0..6), |segments| {
        let raw = render(&segments);
        let result = extract(&raw);

        if let Some(j) = &result.json_text {
            prop_assert!(serde_json::from_str::<Value>(j).is_ok(), "json_text does not parse: {}", j);
            prop_assert!(result.unparsed_candidate.is_none());
        }

        let fenced: Vec<&FencedBody> = segments
            .iter()
            .filter_map(|s| match s {
                Segment::Fenced { body, .. } => Some(body),
                _ => None,
            })
            .collect();
        let first_object = fenced.iter().find_map(|b| match b {
            FencedBody::Object(v) => Some(v),
            _ => None,
        });
        let first_array = fenced.iter().find_map(|b| match b {
            FencedBody::Array(v) => Some(v),
            _ => None,
        });
        let bare = segments.iter().find_map(|s| match s {
            Segment::Bare(v) => Some(v),
            _ => None,
        });

        let parsed = result.json_text.as_deref().map(|j| serde_json::from_str::<Value>(j).unwrap());
        match (first_object, first_array) {
            (Some(obj), _) => {
                prop_assert_eq!(result.method, ExtractionMethod::Fenced);
                prop_assert_eq!(parsed.as_ref(), Some(obj));
            }
            (None, Some(arr)) => {
                prop_assert_eq!(result.method, ExtractionMethod::Fenced);
                prop_assert_eq!(parsed.as_ref(), Some(arr));
            }
            (None, None) => {
                if let Some(v) = bare {
                    prop_assert_eq!(result.method, ExtractionMethod::BraceScan);
                    prop_assert_eq!(parsed.as_ref(), Some(v));
                } else {
                    prop_assert_eq!(result.method, ExtractionMethod::None);
                    prop_assert!(result.json_text.is_none());
                    prop_assert_eq!(result.remainder_text.as_str(), raw.as_str());
                }
            }
        }

        // The extracted span is removed and nothing else changes.
        if let Some(j) = &result.json_text {
            prop_assert!(result.remainder_text.len() < raw.len());
            prop_assert!(raw.len() - result.remainder_text.len() >= j.len());
        }

        // A single fenced block leaves nothing extractable behind.
        let fenced_count = fenced.len();
        if result.method == ExtractionMethod::Fenced && fenced_count == 1 && bare.is_none() {
            prop_assert!(extract(&result.remainder_text).json_text.is_none());
        }
        Ok(())
    }))
}

// ---- validator shape, determinism and canonical form ---------------------

fn mutated_automation() -> impl Strategy<Value = Value> {
    let base = json!({
        "alias": "night",
        "trigger": [{"platform": "time", "at": "22:00:00"}],
        "action": [{"service": "light.turn_off", "entity_id": "light.a"}]
    });
    let key = prop_oneof![
        Just("alias"), Just("name"), Just("trigger"), Just("action"), Just("condition"), Just("mode"), Just("below"),
    ];
    prop::collection::vec((key, json_value(), 0usize..3), 0..4).prop_map(move |edits| {
        let mut doc = base.clone();
        for (key, value, target) in edits {
            let slot = match target {
                0 => Some(&mut doc),
                1 => doc.get_mut("trigger").and_then(|t| t.get_mut(0)),
                _ => doc.get_mut("action").and_then(|a| a.get_mut(0)),
            };
            if let Some(Value::Object(map)) = slot {
                map.insert(key.to_string(), value);
            }
        }
        doc
    })
}

fn malformed_shape_ok(message: &str) -> bool {
    let Some(rest) = message.strip_prefix("Message malformed: ") else {
        return false;
    };
    let Some(at) = rest.rfind(" @ data['") else {
        return false;
    };
    let key = &rest[at + " @ data['".len()..];
    let Some(key) = key.strip_suffix("']") else {
        return false;
    };
    !key.is_empty() && !key.contains('\'')
}

pub fn validator_properties(cases: u32) -> Result<(), String> {
    let home = small_home();
    report(runner(cases).run(&(mutated_automation(), any::<bool>()), |(doc, strict)| {
        let text = doc.to_string();
        let outcome = validate_offline(&text, &home, strict);
        prop_assert_eq!(&outcome, &validate_offline(&text, &home, strict));
        match outcome.status {
            ValidationStatus::Malformed => {
                prop_assert!(malformed_shape_ok(&outcome.message), "bad shape: {}", outcome.message)
            }
            ValidationStatus::Valid => {
                prop_assert_eq!(outcome.message.as_str(), "Home-assistant uploaded the automation correctly");
                prop_assert!(Automation::from_valid_json(&text).is_some());
            }
            ValidationStatus::ParseError => prop_assert!(false, "serialized JSON reported as unparseable"),
        }
        Ok(())
    }))
}

pub fn canonical_round_trip(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&json_value(), |v| {
        let canonical = to_canonical_string(&v);
        let back: Value = serde_json::from_str(&canonical).unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert_eq!(to_canonical_string(&back), canonical.clone());
        let reparsed: Value = serde_json::from_str(&reordered(&v)).unwrap();
        prop_assert_eq!(to_canonical_string(&reparsed), canonical);
        Ok(())
    }))
}

pub fn energy_permutation_invariance(cases: u32) -> Result<(), String> {
    let rows = prop::collection::vec((prop_oneof![Just("tv"), Just("Lamp"), Just("lamp"), Just("oven")], 0.0f64..3000.0), 1..20);
    let strategy = rows.prop_flat_map(|rows| (Just(rows.clone()), Just(rows).prop_shuffle()));
    report(runner(cases).run(&strategy, |(rows, shuffled)| {
        let a = ingest_energy_annotations(&[AnnotationTable::from_rows(rows.clone())]).unwrap();
        let split = shuffled.len() / 2;
        let b = ingest_energy_annotations(&[
            AnnotationTable::from_rows(shuffled[split..].to_vec()),
            AnnotationTable::from_rows(shuffled[..split].to_vec()),
        ])
        .unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    }))
}
