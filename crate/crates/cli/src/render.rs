//! JSON or flat CSV output.

use serde_json::Value;

use crate::Format;

pub fn document(value: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(value).expect("report serializes"),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            write_csv(&["key", "value"], rows.into_iter().map(|(k, v)| vec![k, v]))
        }
    }
}

/// One CSV row per check.
pub fn verify(value: &Value, format: Format) -> String {
    if format == Format::Json {
        return document(value, format);
    }
    let rows = value["checks"].as_array().into_iter().flatten().map(|c| {
        let count = |key: &str| c[key].as_array().map_or(0, Vec::len).to_string();
        vec![
            scalar(&c["check_name"]),
            scalar(&c["seed"]),
            scalar(&c["instances_run"]),
            scalar(&c["passed"]),
            count("skipped"),
            count("failures"),
            scalar(&c["status"]),
        ]
    });
    write_csv(&["check", "seed", "instances_run", "passed", "skipped", "failures", "status"], rows)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Objects become dotted keys; arrays of scalars become space-separated cells.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&key(k), child, rows);
            }
        }
        Value::Array(items) if items.iter().all(is_scalar) => {
            rows.push((prefix.to_string(), items.iter().map(scalar).collect::<Vec<_>>().join(" ")));
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), child, rows);
            }
        }
        other => rows.push((prefix.to_string(), scalar(other))),
    }
}

fn write_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("utf-8 fields").trim_end().to_string()
}
