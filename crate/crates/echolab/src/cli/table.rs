use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::CliError;

/// One cell. Floats always print with a '.' or an exponent, so the kind survives a CSV round trip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Int(v) => v as f64,
            Value::Float(v) => v,
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Parse(format!("bad table cell {s:?}"));
        if s.bytes().all(|b| b.is_ascii_digit() || b == b'-') {
            s.parse().map(Value::Int).map_err(|_| bad())
        } else {
            s.parse().map(Value::Float).map_err(|_| bad())
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            // Debug gives the shortest representation that parses back to the same bits
            Value::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    /// ordered (key, value) pairs written as '#' lines ahead of the header
    pub provenance: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.into(),
            provenance: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.provenance.push((key.into(), value.into()));
    }

    pub fn provenance(&self, key: &str) -> Option<&str> {
        self.provenance.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64()).collect())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn emit<W: Write>(table: &ResultTable, format: Format, mut out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            writeln!(out, "# experiment: {}", table.experiment)?;
            for (k, v) in &table.provenance {
                writeln!(out, "# {k}: {}", v.replace('\n', " "))?;
            }
            writeln!(out, "{}", table.columns.join(","))?;
            for r in &table.rows {
                let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, table).map_err(|e| CliError::Io(e.into()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn emit_string(table: &ResultTable, format: Format) -> String {
    let mut buf = Vec::new();
    emit(table, format, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("tables are UTF-8")
}

/// Reads back what `emit` wrote in CSV form.
pub fn parse_csv(text: &str) -> Result<ResultTable, CliError> {
    let mut lines = text.lines();
    let mut experiment = None;
    let mut provenance = Vec::new();
    let header = loop {
        let line = lines.next().ok_or_else(|| CliError::Parse("missing header row".into()))?;
        let Some(c) = line.strip_prefix("# ") else { break line };
        let (k, v) = c.split_once(": ").ok_or_else(|| CliError::Parse(format!("bad comment line {line:?}")))?;
        if k == "experiment" && experiment.is_none() {
            experiment = Some(v.to_string());
        } else {
            provenance.push((k.to_string(), v.to_string()));
        }
    };
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for line in lines {
        let r = line.split(',').map(Value::parse).collect::<Result<Vec<_>, _>>()?;
        if r.len() != columns.len() {
            return Err(CliError::Parse(format!("row of {} cells under {} columns", r.len(), columns.len())));
        }
        rows.push(r);
    }
    Ok(ResultTable { experiment: experiment.unwrap_or_default(), provenance, columns, rows })
}
