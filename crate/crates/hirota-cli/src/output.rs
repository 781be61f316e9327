//! JSON report assembly with fixed float formatting.

use serde::Serialize;
use serde_json::{Number, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Rewrite every non-integer number with 17 significant digits.
fn fix_floats(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n.as_f64() {
                if let Ok(m) = format!("{x:.16e}").parse::<Number>() {
                    *n = m;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(fix_floats),
        Value::Object(o) => o.values_mut().for_each(fix_floats),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

/// The top-level document: {version, command, config, reports, pass}.
pub fn document(command: &str, config: Value, reports: Vec<Value>) -> String {
    let pass = reports.iter().all(|r| r.get("pass").and_then(Value::as_bool).unwrap_or(true));
    let mut doc = serde_json::json!({
        "version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "reports": reports,
        "pass": pass,
    });
    fix_floats(&mut doc);
    let mut s = serde_json::to_string_pretty(&doc).expect("json");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_passes() {
        let d: Value = serde_json::from_str(&document("verify", Value::Null, vec![])).unwrap();
        assert_eq!(d["version"], 1);
        assert_eq!(d["reports"], Value::Array(vec![]));
        assert_eq!(d["pass"], true);
    }

    #[test]
    fn one_failure_fails_the_document() {
        let d = document("bt", Value::Null, vec![serde_json::json!({"pass": true}), serde_json::json!({"pass": false})]);
        assert!(d.contains("\"pass\": false\n}"));
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let d = document("x", serde_json::json!({"a": 0.1, "n": 3, "z": 0.0}), vec![]);
        assert!(d.contains("\"a\": 1.0000000000000001e-1"), "{d}");
        assert!(d.contains("\"n\": 3"));
        assert!(d.contains("\"z\": 0.0000000000000000e+0"), "{d}");
    }
}
