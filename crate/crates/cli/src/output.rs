//! Fixed-precision CSV and JSON writers for analysis outputs.

use std::path::Path;

use anyhow::{Context, Result};
use festcircuit::format::{fixed, round6};
use serde_json::Value;

pub fn num(value: f64) -> String {
    fixed(value)
}

pub fn opt_num(value: Option<f64>) -> String {
    value.map(fixed).unwrap_or_default()
}

/// JSON number rounded to six decimals; non-finite values become `null`.
pub fn jnum(value: f64) -> Value {
    serde_json::Number::from_f64(round6(value)).map_or(Value::Null, Value::Number)
}

pub fn jopt(value: Option<f64>) -> Value {
    value.map_or(Value::Null, jnum)
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("output: cannot create {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("output: cannot write {}", path.display()))
}
