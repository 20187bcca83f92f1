//! CSV and JSON emission.
//!
//! Every document starts with the resolved configuration and the library
//! version: a `#` comment block in CSV, a `run` object in JSON. Numbers in CSV
//! carry 17 significant digits; JSON uses the shortest representation that
//! parses back to the same `f64`. Nothing time-dependent is written, so equal
//! configurations give byte-identical files.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::{Format, ScenarioConfig};
use crate::CliError;

/// Tabular payload plus a small summary object.
pub struct Emission {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Whole-run JSON payload; its fields become top-level keys.
    pub payload: Map<String, Value>,
    /// Scalar results; written beside a CSV file or inside the JSON document.
    pub summary: Map<String, Value>,
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn run_record(config: &ScenarioConfig) -> Value {
    json!({
        "program": "toa",
        "version": toa_core::VERSION,
        "config": config,
    })
}

/// Flattens the config to sorted `key = value` lines.
pub fn config_echo(config: &ScenarioConfig) -> Vec<String> {
    let value = serde_json::to_value(config).expect("config serializes");
    let mut lines = Vec::new();
    flatten("", &value, &mut lines);
    lines
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            out.push(format!("{prefix} = {}", parts.join(",")));
        }
        other => out.push(format!("{prefix} = {}", scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(":"),
        other => other.to_string(),
    }
}

pub fn render_csv(config: &ScenarioConfig, e: &Emission) -> String {
    let mut s = format!("# toa {} {}\n", toa_core::VERSION, config.command.name());
    for line in config_echo(config) {
        s.push_str("# ");
        s.push_str(&line);
        s.push('\n');
    }
    s.push_str(&e.columns.join(","));
    s.push('\n');
    for row in &e.rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn render_json(config: &ScenarioConfig, e: &Emission) -> String {
    let mut doc = Map::new();
    doc.insert("run".into(), run_record(config));
    doc.insert("summary".into(), Value::Object(e.summary.clone()));
    for (k, v) in &e.payload {
        doc.insert(k.clone(), v.clone());
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("document serializes");
    s.push('\n');
    s
}

pub fn render_summary(config: &ScenarioConfig, e: &Emission) -> String {
    let doc = json!({ "run": run_record(config), "summary": Value::Object(e.summary.clone()) });
    let mut s = serde_json::to_string_pretty(&doc).expect("summary serializes");
    s.push('\n');
    s
}

/// `out.csv` → `out.summary.json`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.json"))
}

/// Writes the document and, for CSV, its summary file. With no output path
/// the CSV summary is returned for stderr instead.
pub fn emit(config: &ScenarioConfig, e: &Emission) -> Result<Option<String>, CliError> {
    let (main, side) = match config.output.format {
        Format::Csv => (render_csv(config, e), Some(render_summary(config, e))),
        Format::Json => (render_json(config, e), None),
    };
    match &config.output.path {
        Some(path) => {
            write(path, &main)?;
            if let Some(side) = side {
                write(&summary_path(path), &side)?;
            }
            Ok(None)
        }
        None => {
            print!("{main}");
            // the config echo is already on stdout; stderr gets the scalars only
            Ok(side.map(|_| format!("summary {}\n", Value::Object(e.summary.clone()))))
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
