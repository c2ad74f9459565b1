//! Derived tables: per-configuration summaries, green/no-green pairs and the
//! heatmap matrices, plus their CSV forms.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ecomate_core::analysis::{
    format_temperature, pair_green_nogreen, summarize, summarize_pairs, FailureClass, MetricsSummary, PairSummary,
    PairedRecord, RunRecord, SimilarityProvider,
};
use ecomate_core::{CommandCategory, GoalType, HomeTemplate, PromptVariant};

use crate::heatmap::Matrix;
use crate::BenchError;

/// Fixed output file names.
pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARIES_FILE: &str = "summaries.csv";
pub const PAIRS_FILE: &str = "pairs.csv";
pub const PAIR_SUMMARIES_FILE: &str = "pair_summaries.csv";
pub const FAILURES_FILE: &str = "failure_classes.csv";

#[derive(Debug, Clone)]
pub struct Analysis {
    pub summaries: Vec<MetricsSummary>,
    pub pairs: Vec<PairedRecord>,
    pub pair_summaries: Vec<PairSummary>,
    pub heatmaps: Vec<(String, Matrix)>,
    pub failure_counts: Matrix,
}

fn unique<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for item in items {
        if !out.iter().any(|o| o == item) {
            out.push(item.to_string());
        }
    }
    out
}

fn config_label(r: &RunRecord) -> String {
    format!("{} t={}", r.prompt.label(), format_temperature(r.temperature))
}

/// Fraction of valid records per (row, column) cell.
fn validity_matrix(
    records: &[RunRecord],
    rows: &[String],
    cols: &[String],
    col_of: impl Fn(&RunRecord) -> String,
) -> Matrix {
    let mut counts: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for r in records {
        let (Some(ri), Some(ci)) = (
            rows.iter().position(|x| *x == r.llm),
            cols.iter().position(|x| *x == col_of(r)),
        ) else {
            continue;
        };
        let cell = counts.entry((ri, ci)).or_default();
        cell.0 += usize::from(r.json_validity);
        cell.1 += 1;
    }
    Matrix::from_fn(rows.to_vec(), cols.to_vec(), |ri, ci| {
        counts
            .get(&(ri, ci))
            .map(|(valid, total)| *valid as f64 / *total as f64)
    })
}

/// Batch records whose green/no-green counterpart is also present. Partial
/// record sets (a single prompt, a filtered file) pair what they can.
fn complete_pairs(records: &[RunRecord]) -> Vec<RunRecord> {
    let key = |r: &RunRecord| (r.user_command.clone(), r.llm.clone(), r.temperature.to_bits());
    let mut seen: BTreeMap<(String, String, u64), (bool, bool)> = BTreeMap::new();
    for r in records {
        let entry = seen.entry(key(r)).or_default();
        match r.prompt {
            PromptVariant::Green => entry.0 = true,
            PromptVariant::NoGreen => entry.1 = true,
            PromptVariant::EcoMateChat => {}
        }
    }
    records
        .iter()
        .filter(|r| r.prompt.is_batch() && seen.get(&key(r)) == Some(&(true, true)))
        .cloned()
        .collect()
}

/// Everything derived from a record set.
pub fn analyze(
    records: &[RunRecord],
    home: &HomeTemplate,
    categories: &[CommandCategory],
    similarity: &dyn SimilarityProvider,
) -> Result<Analysis, BenchError> {
    let summaries = summarize(records, home, categories)?;
    let batch = complete_pairs(records);
    let pairs = pair_green_nogreen(&batch, similarity)?;
    let pair_summaries = summarize_pairs(&pairs);

    let llms = unique(records.iter().map(|r| r.llm.as_str()));
    let config_labels: Vec<String> = summaries
        .iter()
        .map(|s| format!("{} t={}", s.prompt.label(), format_temperature(s.temperature)))
        .collect();
    let configs = unique(config_labels.iter().map(String::as_str));
    let mut category_names: Vec<String> = categories.iter().map(|c| c.name.clone()).collect();
    for extra in unique(records.iter().map(|r| r.category.as_str())) {
        if !category_names.contains(&extra) {
            category_names.push(extra);
        }
    }
    category_names.retain(|c| records.iter().any(|r| r.category == *c));
    let goal_types: Vec<String> = [GoalType::Immediate, GoalType::Persistent]
        .iter()
        .map(|g| g.as_str().to_string())
        .filter(|g| records.iter().any(|r| r.goal_type.as_str() == g))
        .collect();

    let by_config = validity_matrix(records, &llms, &configs, config_label);
    let by_category = validity_matrix(records, &llms, &category_names, |r| r.category.clone());
    let by_type = validity_matrix(records, &llms, &goal_types, |r| r.goal_type.as_str().to_string());

    let mut sim: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for p in &pairs {
        if let (Some(ri), Some(ci)) = (
            llms.iter().position(|x| *x == p.llm),
            category_names.iter().position(|x| *x == p.category),
        ) {
            sim.entry((ri, ci)).or_default().push(p.similarity);
        }
    }
    let pair_categories: Vec<String> = category_names
        .iter()
        .filter(|c| pairs.iter().any(|p| p.category == **c))
        .cloned()
        .collect();
    let similarity_by_category = Matrix::from_fn(llms.clone(), pair_categories.clone(), |ri, ci| {
        let col = category_names.iter().position(|c| *c == pair_categories[ci])?;
        sim.get(&(ri, col))
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
    });

    let classes: Vec<String> = FailureClass::ALL.iter().map(|c| c.id().to_string()).collect();
    let failure_counts = Matrix::from_fn(llms.clone(), classes, |ri, ci| {
        let class = FailureClass::ALL[ci];
        Some(
            records
                .iter()
                .filter(|r| r.llm == llms[ri] && r.failure_class == Some(class))
                .count() as f64,
        )
    });

    Ok(Analysis {
        summaries,
        pairs,
        pair_summaries,
        heatmaps: vec![
            ("heatmap_validity_config".into(), by_config),
            ("heatmap_validity_category".into(), by_category),
            ("heatmap_validity_type".into(), by_type),
            ("heatmap_similarity_category".into(), similarity_by_category),
        ],
        failure_counts,
    })
}

fn csv_err(e: impl std::fmt::Display) -> BenchError {
    BenchError::Schema(e.to_string())
}

pub fn write_summaries<W: Write>(writer: W, summaries: &[MetricsSummary]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "llm",
        "prompt",
        "temperature",
        "count",
        "acc",
        "fp",
        "fn",
        "rel",
        "latency_min",
        "latency_max",
        "latency_mean",
        "json_validity",
        "fp_count",
        "fn_count",
        "valid_count",
    ])
    .map_err(csv_err)?;
    for s in summaries {
        out.write_record([
            s.llm.clone(),
            s.prompt.label().to_string(),
            format_temperature(s.temperature),
            s.count.to_string(),
            s.acc.to_string(),
            s.fp.to_string(),
            s.fn_.to_string(),
            s.rel.to_string(),
            s.latency_min_ms.to_string(),
            s.latency_max_ms.to_string(),
            s.latency_mean_ms.to_string(),
            s.validity_pct.to_string(),
            s.fp_count.to_string(),
            s.fn_count.to_string(),
            s.valid_count.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(csv_err)
}

pub fn write_pairs<W: Write>(writer: W, pairs: &[PairedRecord]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "user_command",
        "category",
        "llm",
        "temperature",
        "boolean_difference",
        "latency_difference",
        "similarity",
    ])
    .map_err(csv_err)?;
    for p in pairs {
        out.write_record([
            p.user_command.clone(),
            p.category.clone(),
            p.llm.clone(),
            format_temperature(p.temperature),
            p.boolean_difference.to_string(),
            p.latency_difference_ms.to_string(),
            p.similarity.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(csv_err)
}

pub fn write_pair_summaries<W: Write>(writer: W, summaries: &[PairSummary]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "llm",
        "temperature",
        "count",
        "boolean_difference_mean",
        "boolean_difference_std",
        "similarity_mean",
        "similarity_std",
        "latency_difference_mean",
        "latency_difference_std",
    ])
    .map_err(csv_err)?;
    for s in summaries {
        out.write_record([
            s.llm.clone(),
            format_temperature(s.temperature),
            s.count.to_string(),
            s.boolean_difference.mean.to_string(),
            s.boolean_difference.std.to_string(),
            s.similarity.mean.to_string(),
            s.similarity.std.to_string(),
            s.latency_difference_ms.mean.to_string(),
            s.latency_difference_ms.std.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(csv_err)
}

fn create(path: &Path) -> Result<std::fs::File, BenchError> {
    std::fs::File::create(path).map_err(|e| BenchError::io(path, e))
}

/// Write the derived CSVs (summaries, pairs, pair summaries, heatmap
/// matrices, failure counts) into `dir`.
pub fn write_analysis(dir: &Path, analysis: &Analysis) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    write_summaries(create(&dir.join(SUMMARIES_FILE))?, &analysis.summaries)?;
    write_pairs(create(&dir.join(PAIRS_FILE))?, &analysis.pairs)?;
    write_pair_summaries(create(&dir.join(PAIR_SUMMARIES_FILE))?, &analysis.pair_summaries)?;
    for (name, matrix) in &analysis.heatmaps {
        matrix.write_csv(create(&dir.join(format!("{name}.csv")))?)?;
    }
    analysis.failure_counts.write_csv(create(&dir.join(FAILURES_FILE))?)
}
