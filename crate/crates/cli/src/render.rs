use serde_json::{Map, Value};

use crate::args::Format;

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> String {
    let mut line = fields.into_iter().map(|f| csv_field(&f)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// A single result as ordered name/value pairs.
#[derive(Debug, Default)]
pub struct Record {
    fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.fields.push((name.to_string(), value.into()));
        self
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.fields.iter().cloned().collect::<Map<_, _>>())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => {
                let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                self.fields.iter().map(|(k, v)| format!("{k:<width$}  {}\n", plain(v))).collect()
            }
            Format::Csv => {
                let mut out = csv_line(self.fields.iter().map(|(k, _)| k.clone()));
                out.push_str(&csv_line(self.fields.iter().map(|(_, v)| plain(v))));
                out
            }
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&self.to_json()).expect("json")),
        }
    }
}

/// Homogeneous rows under fixed column names.
#[derive(Debug)]
pub struct Rows {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Rows {
    pub fn new(columns: &[&'static str]) -> Self {
        Rows { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = csv_line(self.columns.iter().map(|c| c.to_string()));
                for r in &self.rows {
                    out.push_str(&csv_line(r.iter().map(plain)));
                }
                out
            }
            Format::Table => {
                let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(plain).collect()).collect();
                let widths: Vec<usize> = self
                    .columns
                    .iter()
                    .enumerate()
                    .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
                    .collect();
                let line = |fields: Vec<String>| {
                    let mut s = fields
                        .iter()
                        .zip(&widths)
                        .map(|(f, w)| format!("{f:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ");
                    s.push('\n');
                    s
                };
                let mut out = line(self.columns.iter().map(|c| c.to_string()).collect());
                for r in cells {
                    out.push_str(&line(r));
                }
                out
            }
            Format::Json => {
                let arr: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect())
                    })
                    .collect();
                format!("{}\n", serde_json::to_string_pretty(&arr).expect("json"))
            }
        }
    }
}
