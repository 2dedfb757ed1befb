//! Canonical JSON reports.
//!
//! Objects are emitted with sorted keys and every non-integer number is
//! rounded to 12 significant digits, so identical runs give identical bytes.

use serde::Serialize;
use serde_json::{Map, Number, Value};

pub const REPORT_SCHEMA: &str = "blamescope/report/1";

/// Rounds `x` to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig12(n.as_f64().expect("f64 number"));
            Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => {
            let mut sorted: Vec<(String, Value)> = map.into_iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(sorted.into_iter().map(|(k, v)| (k, canonicalize(v))).collect::<Map<_, _>>())
        }
        other => other,
    }
}

/// Pretty-printed canonical JSON with a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let v = canonicalize(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Top-level report envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub config: Value,
    pub result: Value,
}

impl Report {
    pub fn new<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> Result<Self, serde_json::Error> {
        Ok(Self {
            schema: REPORT_SCHEMA,
            command: command.into(),
            config: serde_json::to_value(config)?,
            result: serde_json::to_value(result)?,
        })
    }

    pub fn to_canonical_json(&self) -> String {
        canonical_json(self).expect("report values are serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding() {
        assert_eq!(round_sig12(0.1 + 0.2), 0.3);
        assert_eq!(round_sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig12(-2.0e-20 / 3.0), -6.66666666667e-21);
        assert_eq!(round_sig12(0.0), 0.0);
    }

    #[test]
    fn keys_are_sorted_and_floats_rounded() {
        let s = canonical_json(&json!({"b": 0.30000000000000004, "a": [1, 2.5], "c": {"z": 1, "y": null}})).unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": [\n    1,\n    2.5\n  ],\n  \"b\": 0.3,\n  \"c\": {\n    \"y\": null,\n    \"z\": 1\n  }\n}\n"
        );
    }

    #[test]
    fn report_envelope() {
        let r = Report::new("prob", &json!({"outcome": "y1"}), &json!({"probability": 0.5})).unwrap();
        let s = r.to_canonical_json();
        assert!(s.starts_with("{\n  \"command\": \"prob\""));
        assert!(s.contains("\"schema\": \"blamescope/report/1\""));
        assert_eq!(s, r.to_canonical_json());
    }
}
