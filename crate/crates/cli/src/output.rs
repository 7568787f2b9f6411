use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde_json::{Map, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// The result of one command: parameters, a table, and an overall verdict.
pub struct Report {
    pub command: &'static str,
    pub params: Vec<(&'static str, Value)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub notes: Vec<String>,
    pub passed: bool,
    /// Whether text output starts with the parameter lines.
    pub text_params: bool,
}

impl Report {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            params: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
            passed: true,
            text_params: true,
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl Into<Value>) {
        self.params.push((key, value.into()));
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Text => Ok(self.text()),
            Format::Json => Ok(serde_json::to_string_pretty(&self.json())? + "\n"),
            Format::Csv => self.csv(),
        }
    }

    fn json(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("command".into(), self.command.into());
        doc.insert(
            "parameters".into(),
            Value::Object(self.params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()),
        );
        let rows = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.clone())).collect()))
            .collect();
        doc.insert("rows".into(), Value::Array(rows));
        doc.insert("notes".into(), self.notes.clone().into());
        doc.insert("passed".into(), self.passed.into());
        Value::Object(doc)
    }

    fn text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.params.iter().filter(|_| self.text_params) {
            out.push_str(&format!("{k}: {}\n", cell_text(v)));
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(cell_text).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| cells.iter().map(|r| r[c].len()).chain([self.columns[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |items: Vec<&str>| {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        if self.columns.len() > 1 {
            out.push_str(&line(self.columns.clone()));
        }
        for r in &cells {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }

    fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(cell_text))?;
        }
        w.flush()?;
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A float cell rounded to 12 significant digits.
pub fn float(x: f64) -> Value {
    boolean_rmt::scalar::format_float(x)
        .parse::<f64>()
        .ok()
        .and_then(Number::from_f64)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

pub fn write_output(text: &str, out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
