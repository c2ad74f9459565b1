//! Canonical JSON rendering: object keys sorted, no insignificant whitespace.
//!
//! Used for the home/energy blocks embedded in prompts, for golden files and
//! for the similarity metric. Sorting is done here rather than relying on the
//! map type behind `serde_json::Value`, so enabling `preserve_order` anywhere
//! in the dependency graph cannot change the output.

use serde::Serialize;
use serde_json::Value;

/// Render a value with recursively sorted object keys and compact separators.
pub fn to_canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

/// Serialize any `Serialize` type canonically.
pub fn serialize_canonical<T: Serialize>(item: &T) -> String {
    let value = serde_json::to_value(item).expect("in-memory model types always serialize");
    to_canonical_string(&value)
}

/// Canonicalize a JSON text. Returns `None` when the text does not parse.
pub fn canonicalize_text(text: &str) -> Option<String> {
    serde_json::from_str::<Value>(text)
        .ok()
        .map(|v| to_canonical_string(&v))
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_value(&map[key], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}
