//! Per-configuration aggregates and green/no-green pair metrics.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::record::RunRecord;
use super::similarity::{pair_similarity, SimilarityProvider};
use super::targets::targeted_entities;
use crate::commands::CommandCategory;
use crate::error::AnalysisError;
use crate::home::HomeTemplate;
use crate::prompt::PromptVariant;

/// Round half away from zero to `places` decimals, for display only.
///
/// A small relative nudge absorbs binary representation error so that values
/// like 0.175 or 0.575, which are exact ratios of small counts, round up.
pub fn round_half_up(value: f64, places: u32) -> f64 {
    let factor = 10f64.powi(places as i32);
    let scaled = value.abs() * factor;
    let nudged = scaled + scaled.max(1.0) * 1e-12;
    value.signum() * (nudged + 0.5).floor() / factor
}

/// Relevance of the devices a routine targets: (R - I) / (R + I), where R
/// counts targeted appliances whose type is relevant to the command's
/// category and I counts every other targeted entity. No targets scores 0.
pub fn relevance_score(doc: &serde_json::Value, category: &CommandCategory, template: &HomeTemplate) -> f64 {
    let (relevant, irrelevant) = relevance_counts(doc, category, template);
    let total = relevant + irrelevant;
    if total == 0 {
        0.0
    } else {
        (relevant as f64 - irrelevant as f64) / total as f64
    }
}

pub fn relevance_counts(doc: &serde_json::Value, category: &CommandCategory, template: &HomeTemplate) -> (usize, usize) {
    let targeted = targeted_entities(doc);
    let relevant = targeted
        .iter()
        .filter(|id| {
            template
                .appliance(id)
                .is_some_and(|a| category.is_relevant(&a.appliance_type))
        })
        .count();
    (relevant, targeted.len() - relevant)
}

/// Relevance score of a record; `None` when its JSON does not parse.
pub fn record_relevance(record: &RunRecord, categories: &[CommandCategory], template: &HomeTemplate) -> Option<f64> {
    let doc = record.parsed_json()?;
    let category = categories.iter().find(|c| c.name == record.category)?;
    Some(relevance_score(&doc, category, template))
}

/// A routine that targets devices although the home has nothing relevant.
pub fn is_false_positive(record: &RunRecord, category: &CommandCategory, template: &HomeTemplate) -> bool {
    !category.has_relevant_appliance(template)
        && record
            .parsed_json()
            .is_some_and(|doc| !targeted_entities(&doc).is_empty())
}

/// No routine although the home has appliances relevant to the command.
pub fn is_false_negative(record: &RunRecord, category: &CommandCategory, template: &HomeTemplate) -> bool {
    category.has_relevant_appliance(template) && !record.has_routine()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub llm: String,
    pub prompt: PromptVariant,
    pub temperature: f64,
    pub count: usize,
    pub acc: f64,
    pub fp: f64,
    pub fn_: f64,
    pub rel: f64,
    pub latency_min_ms: u64,
    pub latency_max_ms: u64,
    pub latency_mean_ms: f64,
    pub validity_pct: f64,
    pub fp_count: usize,
    pub fn_count: usize,
    pub valid_count: usize,
}

/// Key identifying one grid configuration.
fn config_key(r: &RunRecord) -> (String, PromptVariant, u64) {
    (r.llm.clone(), r.prompt, r.temperature.to_bits())
}

/// Group records by key, keeping groups in order of first appearance.
fn group_by<K: Eq + std::hash::Hash + Clone>(
    records: &[RunRecord],
    key: impl Fn(&RunRecord) -> K,
) -> Vec<(K, Vec<&RunRecord>)> {
    let mut order: Vec<(K, Vec<&RunRecord>)> = Vec::new();
    let mut index: HashMap<K, usize> = HashMap::new();
    for r in records {
        let k = key(r);
        match index.get(&k) {
            Some(&i) => order[i].1.push(r),
            None => {
                index.insert(k.clone(), order.len());
                order.push((k, vec![r]));
            }
        }
    }
    order
}

/// Aggregate records per (llm, prompt, temperature), in order of first
/// appearance.
pub fn summarize(
    records: &[RunRecord],
    template: &HomeTemplate,
    categories: &[CommandCategory],
) -> Result<Vec<MetricsSummary>, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyGroup("no records".into()));
    }
    group_by(records, config_key)
        .into_iter()
        .map(|((llm, prompt, temp_bits), group)| {
            summarize_group(&llm, prompt, f64::from_bits(temp_bits), &group, template, categories)
        })
        .collect()
}

fn summarize_group(
    llm: &str,
    prompt: PromptVariant,
    temperature: f64,
    group: &[&RunRecord],
    template: &HomeTemplate,
    categories: &[CommandCategory],
) -> Result<MetricsSummary, AnalysisError> {
    let n = group.len();
    if n == 0 {
        return Err(AnalysisError::EmptyGroup(format!("{llm}/{prompt}/{temperature}")));
    }
    let mut fp_count = 0;
    let mut fn_count = 0;
    let mut valid_count = 0;
    let mut rel_sum = 0.0;
    let mut rel_n = 0usize;
    for r in group {
        if let Some(cat) = categories.iter().find(|c| c.name == r.category) {
            fp_count += usize::from(is_false_positive(r, cat, template));
            fn_count += usize::from(is_false_negative(r, cat, template));
        }
        valid_count += usize::from(r.json_validity);
        if let Some(rel) = record_relevance(r, categories, template) {
            rel_sum += rel;
            rel_n += 1;
        }
    }
    let fp = fp_count as f64 / n as f64;
    let fn_ = fn_count as f64 / n as f64;
    let latencies = group.iter().map(|r| r.latency_ms);
    Ok(MetricsSummary {
        llm: llm.to_string(),
        prompt,
        temperature,
        count: n,
        acc: 1.0 - (fp + fn_),
        fp,
        fn_,
        rel: if rel_n == 0 { 0.0 } else { rel_sum / rel_n as f64 },
        latency_min_ms: latencies.clone().min().unwrap_or(0),
        latency_max_ms: latencies.clone().max().unwrap_or(0),
        latency_mean_ms: latencies.map(|l| l as f64).sum::<f64>() / n as f64,
        validity_pct: valid_count as f64 / n as f64,
        fp_count,
        fn_count,
        valid_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRecord {
    pub user_command: String,
    pub category: String,
    pub llm: String,
    pub temperature: f64,
    pub boolean_difference: i8,
    pub latency_difference_ms: i64,
    pub similarity: f64,
}

/// Match green and no-green records of the same (command, llm, temperature)
/// and compute their differences.
pub fn pair_green_nogreen(
    records: &[RunRecord],
    provider: &dyn SimilarityProvider,
) -> Result<Vec<PairedRecord>, AnalysisError> {
    let batch: Vec<RunRecord> = records
        .iter()
        .filter(|r| r.prompt.is_batch())
        .cloned()
        .collect();
    let groups = group_by(&batch, |r| (r.user_command.clone(), r.llm.clone(), r.temperature.to_bits()));
    groups
        .into_iter()
        .map(|((command, llm, temp_bits), group)| {
            let temperature = f64::from_bits(temp_bits);
            let find = |variant| group.iter().find(|r| r.prompt == variant).copied();
            let key = || format!("({command}, {llm}, {temperature})");
            let green = find(PromptVariant::Green).ok_or_else(|| AnalysisError::UnmatchedKey(key()))?;
            let plain = find(PromptVariant::NoGreen).ok_or_else(|| AnalysisError::UnmatchedKey(key()))?;
            Ok(PairedRecord {
                user_command: command.clone(),
                category: green.category.clone(),
                llm: llm.clone(),
                temperature,
                boolean_difference: i8::from(green.json_validity) - i8::from(plain.json_validity),
                latency_difference_ms: green.latency_ms as i64 - plain.latency_ms as i64,
                similarity: pair_similarity(green, plain, provider),
            })
        })
        .collect()
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, std }
    }
}

/// Green-vs-no-green aggregates per (llm, temperature).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub llm: String,
    pub temperature: f64,
    pub count: usize,
    pub boolean_difference: MeanStd,
    pub similarity: MeanStd,
    pub latency_difference_ms: MeanStd,
}

pub fn summarize_pairs(pairs: &[PairedRecord]) -> Vec<PairSummary> {
    let mut order: Vec<((String, u64), Vec<&PairedRecord>)> = Vec::new();
    for p in pairs {
        let key = (p.llm.clone(), p.temperature.to_bits());
        match order.iter_mut().find(|(k, _)| *k == key) {
            Some((_, group)) => group.push(p),
            None => order.push((key, vec![p])),
        }
    }
    order
        .into_iter()
        .map(|((llm, t), group)| {
            let col = |f: &dyn Fn(&PairedRecord) -> f64| group.iter().map(|p| f(p)).collect::<Vec<f64>>();
            PairSummary {
                llm,
                temperature: f64::from_bits(t),
                count: group.len(),
                boolean_difference: MeanStd::of(&col(&|p| p.boolean_difference as f64)),
                similarity: MeanStd::of(&col(&|p| p.similarity)),
                latency_difference_ms: MeanStd::of(&col(&|p| p.latency_difference_ms as f64)),
            }
        })
        .collect()
}
