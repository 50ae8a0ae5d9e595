//! Rendering of run results as one JSON document or one CSV table.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Rows with a fixed header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Rows as JSON objects keyed by column name.
    pub fn records(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().cloned())
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Everything a subcommand produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub results: Value,
    pub table: Table,
    pub checks: Vec<Check>,
}

impl RunOutput {
    /// Output whose JSON results are the table records.
    pub fn from_table(table: Table) -> Self {
        Self {
            results: json!({ "rows": table.records() }),
            table,
            checks: Vec::new(),
        }
    }

    pub fn with_checks(mut self, checks: Vec<Check>) -> Self {
        self.checks = checks;
        self
    }
}

fn csv_field(value: &Value) -> String {
    let raw = match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

pub fn render(format: Format, config: &Value, out: &RunOutput) -> String {
    match format {
        Format::Json => {
            let doc = json!({
                "config": config,
                "results": out.results,
                "checks": out.checks,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("values are serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# config: {config}").unwrap();
            for c in &out.checks {
                let status = if c.passed { "pass" } else { "fail" };
                writeln!(s, "# check {}: {status} ({})", c.name, c.detail).unwrap();
            }
            writeln!(s, "{}", out.table.columns.join(",")).unwrap();
            for row in &out.table.rows {
                let fields: Vec<String> = row.iter().map(csv_field).collect();
                writeln!(s, "{}", fields.join(",")).unwrap();
            }
            s
        }
    }
}

pub fn emit(text: &str, path: Option<&std::path::Path>) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
