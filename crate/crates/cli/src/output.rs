//! Report rendering: JSON with numbers rounded to 12 significant digits,
//! or CSV (a table for arrays of flat records, key/value rows otherwise).

use std::io::Write;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Round to 12 significant digits. Exact integers stay integers.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn number(x: f64) -> Value {
    let r = round12(x);
    if r.fract() == 0.0 && r.abs() < 1e15 {
        Value::from(r as i64)
    } else {
        serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
    }
}

/// Apply [`round12`] to every number in the tree.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !(n.is_i64() || n.is_u64()) => number(x),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        other => out.push((prefix.to_string(), scalar(other).unwrap_or_default())),
    }
}

/// Records that can be written as one CSV table, if `v` is an array of
/// objects whose fields flatten to the same keys.
fn as_table(v: &Value) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let rows = v.as_array()?;
    let first = rows.first()?;
    first.as_object()?;
    let mut header = Vec::new();
    let mut flat0 = Vec::new();
    flatten("", first, &mut flat0);
    header.extend(flat0.iter().map(|(k, _)| k.clone()));
    let mut body = Vec::new();
    for r in rows {
        let mut flat = Vec::new();
        flatten("", r, &mut flat);
        if flat.iter().map(|(k, _)| k).ne(header.iter()) {
            return None;
        }
        body.push(flat.into_iter().map(|(_, v)| v).collect());
    }
    Some((header, body))
}

fn render_csv(v: &Value) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    // A report whose `rows` field is a table is written as that table.
    let table = as_table(v).or_else(|| v.get("rows").and_then(as_table));
    match table {
        Some((header, body)) => {
            w.write_record(&header)?;
            for r in body {
                w.write_record(&r)?;
            }
        }
        None => {
            let mut flat = Vec::new();
            flatten("", v, &mut flat);
            w.write_record(["key", "value"])?;
            for (k, val) in flat {
                w.write_record([k, val])?;
            }
        }
    }
    Ok(w.into_inner().context("flushing CSV")?)
}

/// Write `report` to `path` (or stdout).
pub fn emit(report: Value, format: Format, path: Option<&std::path::Path>) -> Result<()> {
    let report = normalize(report);
    let bytes = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => render_csv(&report)?,
    };
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

/// Build an object from key/value pairs, keeping their order.
pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(normalize(json!(2.0)), json!(2));
        assert_eq!(normalize(json!({"a": [0.30000000000000004]})), json!({"a": [0.3]}));
    }

    #[test]
    fn csv_table_and_pairs() {
        let t = render_csv(&json!([{"a": 1, "b": true}, {"a": 2, "b": false}])).unwrap();
        assert_eq!(String::from_utf8(t).unwrap(), "a,b\n1,true\n2,false\n");
        let p = render_csv(&json!({"x": {"y": 1}})).unwrap();
        assert_eq!(String::from_utf8(p).unwrap(), "key,value\nx.y,1\n");
    }
}
