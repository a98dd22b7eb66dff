//! Manifest, summary and CSV persistence.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// One named acceptance property of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Property {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Property {
    pub fn new(name: &str, pass: bool, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Property {
            name: name.to_string(),
            pass,
            value,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub kind: String,
    pub passed: bool,
    pub failing: Vec<String>,
    pub properties: Vec<Property>,
    /// Experiment-specific results (counts, ranks, reports).
    pub data: serde_json::Value,
}

impl Summary {
    pub fn new(kind: &str, properties: Vec<Property>, data: serde_json::Value) -> Self {
        let failing: Vec<String> = properties.iter().filter(|p| !p.pass).map(|p| p.name.clone()).collect();
        Summary {
            kind: kind.to_string(),
            passed: failing.is_empty(),
            failing,
            properties,
            data,
        }
    }
}

/// Collects rows in memory and writes them once, from a single writer.
pub struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(&self.name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Shortest round-trip representation, so identical numbers print identically.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
