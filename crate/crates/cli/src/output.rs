//! Tabular output in CSV or JSON lines.
//!
//! Every record starts with a `schema` column. Floats are written in scientific
//! notation with 17 significant digits so they parse back to the same bits.
//! JSON has no encoding for non-finite numbers, so those become `null` there.

use crate::error::{invalid, CliResult};
use serde::Deserialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum Format {
    #[default]
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "jsonl", alias = "json-lines")]
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Value {
    pub fn opt(x: Option<f64>) -> Value {
        x.map_or(Value::Empty, Value::Num)
    }

    fn csv_field(&self) -> String {
        match self {
            Value::Num(x) => format_float(*x),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Empty => String::new(),
        }
    }

    fn json_field(&self) -> String {
        match self {
            Value::Num(x) if x.is_finite() => format_float(*x),
            Value::Num(_) | Value::Empty => "null".into(),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => serde_json::to_string(s).expect("strings always serialize"),
            Value::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as u64)
    }
}

impl From<u64> for Value {
    fn from(i: u64) -> Self {
        Value::Int(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One output record, in column order.
#[derive(Debug, Clone, Default)]
pub struct Row(Vec<(String, Value)>);

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn set(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.0.push((key.into(), value.into()));
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.0.push((key.into(), value.into()));
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }
}

enum Backend {
    Csv(Box<csv::Writer<Box<dyn Write>>>),
    Jsonl(Box<dyn Write>),
}

/// Writes rows with a fixed header. The header is written even if no rows follow.
pub struct Sink {
    schema: &'static str,
    columns: Vec<String>,
    backend: Backend,
}

impl Sink {
    pub fn open(out: Option<&Path>, format: Format, schema: &'static str, columns: Vec<String>) -> CliResult<Self> {
        let writer: Box<dyn Write> = match out {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
                invalid(format!("cannot create {}: {e}", path.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let mut columns = columns;
        columns.insert(0, "schema".to_string());
        let backend = match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(writer);
                w.write_record(&columns)?;
                Backend::Csv(Box::new(w))
            }
            Format::Jsonl => Backend::Jsonl(writer),
        };
        Ok(Sink { schema, columns, backend })
    }

    pub fn write(&mut self, row: &Row) -> CliResult<()> {
        assert!(
            row.keys().eq(self.columns[1..].iter().map(String::as_str)),
            "row columns do not match the header"
        );
        match &mut self.backend {
            Backend::Csv(w) => {
                let fields = std::iter::once(self.schema.to_string()).chain(row.0.iter().map(|(_, v)| v.csv_field()));
                w.write_record(fields)?;
            }
            Backend::Jsonl(w) => {
                let mut line = format!("{{\"schema\":{}", serde_json::to_string(self.schema).expect("schema"));
                for (k, v) in &row.0 {
                    line.push(',');
                    line.push_str(&serde_json::to_string(k).expect("key"));
                    line.push(':');
                    line.push_str(&v.json_field());
                }
                line.push('}');
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> CliResult<()> {
        match self.backend {
            Backend::Csv(mut w) => w.flush()?,
            Backend::Jsonl(mut w) => w.flush()?,
        }
        Ok(())
    }
}
