//! Human-readable tables: the per-configuration summary and the
//! green/no-green comparison, rounded half-up for display.

use std::fmt::Write as _;
use std::path::Path;

use ecomate_core::analysis::{format_temperature, round_half_up, MetricsSummary, PairSummary};

use crate::tables::{write_analysis, Analysis};
use crate::BenchError;

pub const SUMMARY_TABLE_FILE: &str = "summary_table.md";
pub const PAIR_TABLE_FILE: &str = "pair_table.md";

fn fixed(v: f64, places: u32) -> String {
    format!("{:.*}", places as usize, round_half_up(v, places))
}

/// One display row of the summary table, every cell already formatted.
pub fn summary_row(s: &MetricsSummary) -> Vec<String> {
    vec![
        s.llm.clone(),
        s.prompt.label().to_string(),
        format_temperature(s.temperature),
        fixed(s.acc, 2),
        fixed(s.fp, 2),
        fixed(s.fn_, 2),
        fixed(s.rel, 2),
        s.latency_min_ms.to_string(),
        s.latency_max_ms.to_string(),
        fixed(s.latency_mean_ms, 2),
        fixed(s.validity_pct, 2),
    ]
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "LLM",
    "Prompt",
    "t",
    "Acc",
    "FP",
    "FN",
    "Rel",
    "Latency min (ms)",
    "Latency max (ms)",
    "Latency mean (ms)",
    "JSON validity",
];

/// One display row of the pair table. Boolean difference keeps three
/// decimals, latency difference none.
pub fn pair_row(p: &PairSummary) -> Vec<String> {
    let ms = |m: f64, s: f64, places| format!("{} ({})", fixed(m, places), fixed(s, places));
    vec![
        p.llm.clone(),
        format_temperature(p.temperature),
        ms(p.boolean_difference.mean, p.boolean_difference.std, 3),
        ms(p.similarity.mean, p.similarity.std, 3),
        ms(p.latency_difference_ms.mean, p.latency_difference_ms.std, 0),
    ]
}

pub const PAIR_HEADER: [&str; 5] = [
    "LLM",
    "t",
    "Boolean difference",
    "Similarity",
    "Latency difference (ms)",
];

fn markdown(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out
}

pub fn summary_table(summaries: &[MetricsSummary]) -> String {
    let rows: Vec<_> = summaries.iter().map(summary_row).collect();
    markdown(&SUMMARY_HEADER, &rows)
}

/// Means with standard deviations in parentheses.
pub fn pair_table(pairs: &[PairSummary]) -> String {
    let rows: Vec<_> = pairs.iter().map(pair_row).collect();
    markdown(&PAIR_HEADER, &rows)
}

/// Write every report artifact into `dir`: derived CSVs, heatmap SVGs and
/// the two markdown tables.
pub fn write_report(dir: &Path, analysis: &Analysis) -> Result<(), BenchError> {
    write_analysis(dir, analysis)?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| BenchError::io(&path, e))
    };
    for (name, matrix) in &analysis.heatmaps {
        let decimals = if name.contains("similarity") { 3 } else { 2 };
        write(&format!("{name}.svg"), matrix.to_svg(&name.replace('_', " "), decimals))?;
    }
    write(
        "failure_classes.svg",
        analysis.failure_counts.to_svg("failure classes per llm", 0),
    )?;
    write(SUMMARY_TABLE_FILE, summary_table(&analysis.summaries))?;
    write(PAIR_TABLE_FILE, pair_table(&analysis.pair_summaries))
}
