//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// An in-memory CSV table; empty cells stand for undefined values.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&'static str]) -> Self {
        Self { file: file.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self, path: &Path) -> Result<Vec<u8>, CliError> {
        let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into_error() })
    }

    pub fn write(&self, dir: &Path) -> Result<Artifact, CliError> {
        let path = dir.join(&self.file);
        write_atomic(&path, &self.to_bytes(&path)?)?;
        Ok(Artifact { file: self.file.clone(), rows: self.rows.len() })
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|source| CliError::Io { path: tmp.clone(), source })?;
    fs::rename(&tmp, path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    /// Failing required checks make the run exit non-zero.
    pub required: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn required(passed: bool, value: f64, detail: impl Into<String>) -> Self {
        Self { passed, required: true, value: Some(value), detail: detail.into() }
    }

    pub fn observed(passed: bool, value: Option<f64>, detail: impl Into<String>) -> Self {
        Self { passed, required: false, value, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub experiment: String,
    pub status: String,
    pub threads: usize,
    pub warnings: Vec<String>,
    pub row_errors: Vec<String>,
    pub timings_s: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, Check>,
    pub artifacts: Vec<Artifact>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("manifest.txt");
        let text = toml::to_string(self).map_err(|e| CliError::Io {
            path: path.clone(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })?;
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}
