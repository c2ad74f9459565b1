//! Locate the automation JSON inside a model reply.
//!
//! Replies are markdown: the routine normally sits in a ``` fence, with or
//! without a language tag. When no fence holds parseable JSON, a balanced
//! brace scan over the whole reply is tried so that outputs with misplaced
//! back-ticks or stray words in front of the object can still be judged by
//! the validator. The method used is recorded with the result.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMethod {
    Fenced,
    BraceScan,
    None,
}

impl ExtractionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtractionMethod::Fenced => "fenced",
            ExtractionMethod::BraceScan => "brace_scan",
            ExtractionMethod::None => "none",
        }
    }
}

impl fmt::Display for ExtractionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionResult {
    /// The extracted JSON document; always parses when present.
    pub json_text: Option<String>,
    /// The reply with the extracted span removed.
    pub remainder_text: String,
    pub method: ExtractionMethod,
    /// Body of the first fenced block when nothing parsed. This is what a
    /// naive fence extractor would have submitted, kept so the validator can
    /// report the syntax error.
    pub unparsed_candidate: Option<String>,
}

impl ExtractionResult {
    /// The text to submit to the validator: the parsed JSON, else the
    /// unparsed fenced candidate.
    pub fn submission(&self) -> Option<&str> {
        self.json_text
            .as_deref()
            .or(self.unparsed_candidate.as_deref())
    }
}

/// A fenced code block found in the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FencedBlock<'a> {
    pub info: &'a str,
    pub body: &'a str,
    /// Byte span of the whole block, fences included.
    pub span: Range<usize>,
}

/// Find ``` fenced blocks in order. An unterminated fence runs to the end.
pub fn fenced_blocks(text: &str) -> Vec<FencedBlock<'_>> {
    let mut blocks = Vec::new();
    let mut pos = 0;
    while let Some(rel) = text[pos..].find("```") {
        let start = pos + rel;
        let mut cursor = start;
        while text[cursor..].starts_with('`') {
            cursor += 1;
        }
        let fence_len = cursor - start;
        let line_end = text[cursor..].find('\n').map(|i| cursor + i);

        // Info string: a language tag up to the end of the opening line.
        // Anything else on that line is already block content.
        let (info, body_start) = match line_end {
            Some(end) if is_info_string(text[cursor..end].trim()) => {
                (text[cursor..end].trim(), end + 1)
            }
            None if is_info_string(text[cursor..].trim()) => (text[cursor..].trim(), text.len()),
            _ => ("", cursor),
        };

        let closing = "`".repeat(fence_len.min(3));
        match text[body_start..].find(&closing) {
            Some(rel_close) => {
                let body_end = body_start + rel_close;
                let mut end = body_end;
                while text[end..].starts_with('`') {
                    end += 1;
                }
                blocks.push(FencedBlock {
                    info,
                    body: &text[body_start..body_end],
                    span: start..end,
                });
                pos = end;
            }
            None => {
                blocks.push(FencedBlock {
                    info,
                    body: &text[body_start..],
                    span: start..text.len(),
                });
                break;
            }
        }
    }
    blocks
}

fn is_info_string(s: &str) -> bool {
    s.chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '+' | '.'))
}

fn remove_span(text: &str, span: Range<usize>) -> String {
    let mut out = String::with_capacity(text.len() - span.len());
    out.push_str(&text[..span.start]);
    out.push_str(&text[span.end..]);
    out
}

fn parse(text: &str) -> Option<Value> {
    serde_json::from_str::<Value>(text).ok()
}

/// End (exclusive) of the balanced bracket structure opening at `start`,
/// skipping brackets inside string literals.
fn balanced_end(text: &str, start: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' | b'[' => depth += 1,
            b'}' | b']' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(start + offset + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// First balanced `{...}` span in the text that parses as a JSON object.
fn brace_scan(text: &str) -> Option<Range<usize>> {
    text.match_indices('{').find_map(|(start, _)| {
        let end = balanced_end(text, start)?;
        matches!(parse(&text[start..end]), Some(Value::Object(_))).then_some(start..end)
    })
}

/// Extract the routine JSON from a raw model reply.
pub fn extract(raw: &str) -> ExtractionResult {
    let blocks = fenced_blocks(raw);

    let parsed: Vec<Option<Value>> = blocks.iter().map(|b| parse(b.body.trim())).collect();
    let chosen = parsed
        .iter()
        .position(|v| matches!(v, Some(Value::Object(_))))
        .or_else(|| parsed.iter().position(Option::is_some));
    if let Some(idx) = chosen {
        let block = &blocks[idx];
        return ExtractionResult {
            json_text: Some(block.body.trim().to_string()),
            remainder_text: remove_span(raw, block.span.clone()),
            method: ExtractionMethod::Fenced,
            unparsed_candidate: None,
        };
    }

    if let Some(span) = brace_scan(raw) {
        return ExtractionResult {
            json_text: Some(raw[span.clone()].to_string()),
            remainder_text: remove_span(raw, span),
            method: ExtractionMethod::BraceScan,
            unparsed_candidate: None,
        };
    }

    ExtractionResult {
        json_text: None,
        remainder_text: raw.to_string(),
        method: ExtractionMethod::None,
        unparsed_candidate: blocks
            .first()
            .map(|b| b.body.trim().to_string())
            .filter(|b| !b.is_empty()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_without_tag() {
        let raw = "Here you go:\n```\n{\"alias\":\"a\",\"trigger\":[],\"action\":[]}\n```\nI chose…";
        let r = extract(raw);
        assert_eq!(r.method, ExtractionMethod::Fenced);
        assert_eq!(
            r.json_text.as_deref(),
            Some("{\"alias\":\"a\",\"trigger\":[],\"action\":[]}")
        );
        assert_eq!(r.remainder_text, "Here you go:\n\nI chose…");
    }

    #[test]
    fn fenced_with_language_tag() {
        let raw = "```json\n{\"a\": 1}\n```";
        let r = extract(raw);
        assert_eq!(r.method, ExtractionMethod::Fenced);
        assert_eq!(r.json_text.as_deref(), Some("{\"a\": 1}"));
        assert_eq!(r.remainder_text, "");
    }

    #[test]
    fn inline_fence() {
        let r = extract("see ```{\"a\":1}``` ok");
        assert_eq!(r.json_text.as_deref(), Some("{\"a\":1}"));
        assert_eq!(r.remainder_text, "see  ok");
    }

    #[test]
    fn misplaced_backticks_and_code_word_recovered_by_scan() {
        let raw = "```\nHere is the routine\ncode {\"alias\": \"Dim\", \"trigger\": [{\"platform\": \"state\", \"entity_id\": \"binary_sensor.motion\"}], \"action\": []}";
        let r = extract(raw);
        assert_eq!(r.method, ExtractionMethod::BraceScan);
        let v: Value = serde_json::from_str(r.json_text.as_deref().unwrap()).unwrap();
        assert_eq!(v["alias"], "Dim");
        assert!(r.remainder_text.ends_with("code "));
    }

    #[test]
    fn refusal_has_no_json() {
        let r = extract("I cannot create that routine.");
        assert_eq!(r.method, ExtractionMethod::None);
        assert!(r.json_text.is_none());
        assert!(r.unparsed_candidate.is_none());
        assert_eq!(r.remainder_text, "I cannot create that routine.");
    }

    #[test]
    fn yaml_is_not_parsed() {
        let raw = "```yaml\nalias: night\ntrigger:\n  - platform: time\n    at: '22:00:00'\n```";
        let r = extract(raw);
        assert_eq!(r.method, ExtractionMethod::None);
        assert!(r.unparsed_candidate.unwrap().starts_with("alias: night"));
    }

    #[test]
    fn first_object_block_wins() {
        let raw = "```\nnot json\n```\n```json\n[1,2]\n```\n```\n{\"b\":2}\n```\n```\n{\"c\":3}\n```";
        let r = extract(raw);
        assert_eq!(r.json_text.as_deref(), Some("{\"b\":2}"));
    }

    #[test]
    fn non_object_kept_when_only_option() {
        let r = extract("```\n[{\"alias\":\"x\"}]\n```");
        assert_eq!(r.method, ExtractionMethod::Fenced);
        assert_eq!(r.json_text.as_deref(), Some("[{\"alias\":\"x\"}]"));
    }

    #[test]
    fn unparseable_fence_becomes_candidate() {
        let raw = "```\ncode: {\"alias\": }\n```";
        let r = extract(raw);
        assert_eq!(r.method, ExtractionMethod::None);
        assert_eq!(r.submission(), Some("code: {\"alias\": }"));
    }

    #[test]
    fn braces_inside_strings_are_ignored() {
        let raw = "x {\"alias\": \"a } b {\", \"n\": [1]} y";
        let r = extract(raw);
        assert_eq!(r.method, ExtractionMethod::BraceScan);
        assert_eq!(r.json_text.as_deref(), Some("{\"alias\": \"a } b {\", \"n\": [1]}"));
        assert_eq!(r.remainder_text, "x  y");
    }

    #[test]
    fn unterminated_fence_runs_to_end() {
        let blocks = fenced_blocks("a\n```json\n{\"x\":1}\n");
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].info, "json");
        assert_eq!(blocks[0].body, "{\"x\":1}\n");
    }
}
