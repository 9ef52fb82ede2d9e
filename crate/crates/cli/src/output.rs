//! CSV/JSON emission. CSV tables carry the resolved config as a single
//! `# config {json}` header comment; JSON documents nest it under "config".

use crate::config::{FormatArg, RunConfig};
use crate::CliError;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

/// A table with a fixed column schema plus scalar summary fields.
pub struct Report {
    config: RunConfig,
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    summary: Vec<(&'static str, serde_json::Value)>,
}

impl Report {
    pub fn new(config: RunConfig, columns: Vec<&'static str>) -> Self {
        Self {
            config,
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summary(&mut self, key: &'static str, value: impl Serialize) {
        self.summary
            .push((key, serde_json::to_value(value).expect("summary serializes")));
    }

    pub fn write(self, out: &Option<PathBuf>, format: FormatArg) -> Result<(), CliError> {
        let body = match format {
            FormatArg::Csv => self.to_csv(),
            FormatArg::Json => self.to_json(),
        };
        write_out(out, &body)
    }

    fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# config {}\n", self.config.to_json()));
        for (k, v) in &self.summary {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| ((*c).to_string(), serde_json::json!(v)))
                    .collect::<serde_json::Map<_, _>>()
                    .into()
            })
            .collect();
        let mut doc = serde_json::Map::new();
        doc.insert("config".into(), self.config.to_json());
        for (k, v) in &self.summary {
            doc.insert((*k).to_string(), v.clone());
        }
        doc.insert("columns".into(), serde_json::json!(self.columns));
        doc.insert("rows".into(), serde_json::Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(doc))
            .expect("document serializes");
        s.push('\n');
        s
    }
}

pub fn write_out(path: &Option<PathBuf>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?;
            f.write_all(body.as_bytes())
                .map_err(|e| CliError::Config(format!("write failed: {e}")))?;
        }
        None => {
            print!("{body}");
        }
    }
    Ok(())
}
