//! Experiment reports: JSON summaries plus plot-ready CSV curves.
//!
//! Reports embed the full run configuration and a format version; writes go
//! through a temp file and rename so partial output is never observed.

use crate::config::FORMAT_VERSION;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A named table of numeric columns, exported one CSV file per curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new(name: impl Into<String>, headers: &[&str]) -> Self {
        Self {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub experiment: String,
    /// ISO-8601 UTC timestamp of report creation.
    pub timestamp: String,
    /// The full run configuration, verbatim.
    pub config: serde_json::Value,
    pub passed: bool,
    pub runtime_secs: f64,
    /// Experiment-specific statistics.
    pub summary: serde_json::Value,
    pub curves: Vec<Curve>,
}

impl ExperimentReport {
    pub fn new(
        experiment: &str,
        config: serde_json::Value,
        passed: bool,
        runtime_secs: f64,
        summary: serde_json::Value,
        curves: Vec<Curve>,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            experiment: experiment.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            config,
            passed,
            runtime_secs,
            summary,
            curves,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        atomic_write(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    /// One `<experiment>_<curve>.csv` per curve under `dir`.
    pub fn write_curves_csv(&self, dir: &Path) -> Result<()> {
        for curve in &self.curves {
            let path = dir.join(format!("{}_{}.csv", self.experiment, curve.name));
            let mut buf = Vec::new();
            {
                let mut wtr = csv::Writer::from_writer(&mut buf);
                wtr.write_record(&curve.headers)?;
                for row in &curve.rows {
                    wtr.write_record(row.iter().map(|v| format!("{v}")))?;
                }
                wtr.flush()?;
            }
            atomic_write(&path, &buf)?;
        }
        Ok(())
    }
}

/// Write via temp file + rename in the target directory.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy())
            .unwrap_or_default()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
