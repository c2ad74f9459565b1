//! The record CSV: one row per grid cell, in the benchmark's column layout.

use std::io::{Read, Write};

use ecomate_core::analysis::{format_temperature, FailureClass, RunRecord};
use ecomate_core::prompt::explanation_over_budget;
use ecomate_core::{extract, GoalType, PromptVariant};

use crate::BenchError;

pub const RECORD_COLUMNS: [&str; 12] = [
    "user_command",
    "type",
    "category",
    "llm",
    "prompt",
    "temperature",
    "output",
    "json",
    "latency",
    "json_validity",
    "ha_response",
    "failure_class",
];

fn bool_cell(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

pub fn write_records<W: Write>(writer: W, records: &[RunRecord]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| BenchError::Schema(e.to_string());
    out.write_record(RECORD_COLUMNS).map_err(err)?;
    for r in records {
        let temperature = format_temperature(r.temperature);
        let latency = r.latency_ms.to_string();
        out.write_record([
            r.user_command.as_str(),
            r.goal_type.as_str(),
            r.category.as_str(),
            r.llm.as_str(),
            r.prompt.label(),
            temperature.as_str(),
            r.output.as_str(),
            r.json.as_deref().unwrap_or(""),
            latency.as_str(),
            bool_cell(r.json_validity),
            r.ha_response.as_str(),
            r.failure_class.map(FailureClass::id).unwrap_or(""),
        ])
        .map_err(err)?;
    }
    out.flush().map_err(|e| BenchError::Schema(e.to_string()))
}

pub fn records_to_string(records: &[RunRecord]) -> Result<String, BenchError> {
    let mut buf = Vec::new();
    write_records(&mut buf, records)?;
    String::from_utf8(buf).map_err(|e| BenchError::Schema(e.to_string()))
}

/// Parse a record CSV. The header must match the column layout exactly and
/// at least one row must be present.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<RunRecord>, BenchError> {
    let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = input
        .headers()
        .map_err(|e| BenchError::Schema(e.to_string()))?
        .clone();
    if headers.iter().ne(RECORD_COLUMNS) {
        return Err(BenchError::Schema(format!(
            "expected columns {RECORD_COLUMNS:?}, found {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut records = Vec::new();
    for (idx, row) in input.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| BenchError::Schema(format!("line {line}: {e}")))?;
        let bad = |col: &str, value: &str| BenchError::Schema(format!("line {line}: bad {col} '{value}'"));
        let field = |i: usize| row.get(i).unwrap_or_default();

        let goal_type = GoalType::parse(field(1)).ok_or_else(|| bad("type", field(1)))?;
        let prompt = PromptVariant::from_label(field(4)).ok_or_else(|| bad("prompt", field(4)))?;
        let temperature: f64 = field(5).parse().map_err(|_| bad("temperature", field(5)))?;
        let latency_ms: u64 = field(8).parse().map_err(|_| bad("latency", field(8)))?;
        let json_validity = match field(9) {
            "True" => true,
            "False" => false,
            other => return Err(bad("json_validity", other)),
        };
        let failure_class = match field(11) {
            "" => None,
            id => Some(FailureClass::parse(id).ok_or_else(|| bad("failure_class", id))?),
        };
        if failure_class.is_some() == json_validity {
            return Err(BenchError::Schema(format!(
                "line {line}: failure_class must be present exactly when json_validity is False"
            )));
        }
        let output = field(6).to_string();
        let explanation_over_budget = explanation_over_budget(&extract(&output).remainder_text);
        records.push(RunRecord {
            user_command: field(0).to_string(),
            goal_type,
            category: field(2).to_string(),
            llm: field(3).to_string(),
            prompt,
            temperature,
            output,
            json: Some(field(7)).filter(|j| !j.is_empty()).map(str::to_string),
            latency_ms,
            json_validity,
            ha_response: field(10).to_string(),
            failure_class,
            explanation_over_budget,
        });
    }
    if records.is_empty() {
        return Err(BenchError::Schema("no records".into()));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(valid: bool) -> RunRecord {
        RunRecord {
            user_command: "make it less chilly in here".into(),
            goal_type: GoalType::Immediate,
            category: "Ambient Temperature".into(),
            llm: "GPT3.5".into(),
            prompt: PromptVariant::NoGreen,
            temperature: 0.7,
            output: "Sure:\n```json\n{\"a\": \"x, \\\"y\\\"\"}\n```\nDone.".into(),
            json: Some("{\"a\": \"x, \\\"y\\\"\"}".into()),
            latency_ms: 4400,
            json_validity: valid,
            ha_response: "Message malformed: extra keys not allowed @ data['a']".into(),
            failure_class: (!valid).then_some(FailureClass::Other),
            explanation_over_budget: false,
        }
    }

    #[test]
    fn round_trip() {
        let records = vec![record(false), record(true)];
        let text = records_to_string(&records).unwrap();
        assert!(text.starts_with(
            "user_command,type,category,llm,prompt,temperature,output,json,latency,json_validity,ha_response,failure_class\n"
        ));
        assert!(text.contains(",No green,0.7,"));
        assert_eq!(read_records(text.as_bytes()).unwrap(), records);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(read_records("".as_bytes()), Err(BenchError::Schema(_))));
        let header_only = format!("{}\n", RECORD_COLUMNS.join(","));
        assert!(matches!(read_records(header_only.as_bytes()), Err(BenchError::Schema(_))));
        assert!(matches!(read_records("a,b\n1,2\n".as_bytes()), Err(BenchError::Schema(_))));

        let text = records_to_string(&[record(true)]).unwrap().replace(",True,", ",yes,");
        assert!(read_records(text.as_bytes()).is_err());
        let inconsistent = records_to_string(&[record(true)]).unwrap().replace(",True,", ",False,");
        assert!(read_records(inconsistent.as_bytes()).is_err());
    }
}
