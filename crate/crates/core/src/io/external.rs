//! Externally produced baseline accuracies, for comparison columns that
//! this tool does not compute itself.
//!
//! ```toml
//! name = "SVMRFE"
//!
//! [[result]]
//! dataset = "nonIDH1"
//! mean = 0.7628
//! std = 0.0439
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evaluation::ExternalColumn;

#[derive(Debug, Deserialize)]
struct ExternalFile {
    name: String,
    #[serde(rename = "result")]
    results: Vec<ExternalEntry>,
}

#[derive(Debug, Deserialize)]
struct ExternalEntry {
    dataset: String,
    mean: f64,
    #[serde(default)]
    std: f64,
}

/// Parses an external-results file into a report column. Accuracies are
/// fractions in `[0, 1]`.
pub fn parse_external_column(text: &str) -> Result<ExternalColumn> {
    let file: ExternalFile = toml::from_str(text)
        .map_err(|e| Error::ingestion(None, None, format!("external results: {e}")))?;
    if file.results.is_empty() {
        return Err(Error::ingestion(
            None,
            None,
            "external results file lists no datasets",
        ));
    }
    let mut results = Vec::with_capacity(file.results.len());
    for entry in file.results {
        if !(0.0..=1.0).contains(&entry.mean) {
            return Err(Error::ingestion(
                None,
                Some(entry.dataset.as_str()),
                format!("mean accuracy {} outside [0, 1]", entry.mean),
            ));
        }
        if !(entry.std >= 0.0 && entry.std.is_finite()) {
            return Err(Error::ingestion(
                None,
                Some(entry.dataset.as_str()),
                format!("std {} must be finite and nonnegative", entry.std),
            ));
        }
        if results
            .iter()
            .any(|(name, _, _): &(String, f64, f64)| name == &entry.dataset)
        {
            return Err(Error::ingestion(
                None,
                Some(entry.dataset.as_str()),
                "dataset listed twice",
            ));
        }
        results.push((entry.dataset, entry.mean, entry.std));
    }
    Ok(ExternalColumn {
        name: file.name,
        results,
    })
}

/// Reads and parses an external-results file.
pub fn load_external_column(path: impl AsRef<Path>) -> Result<ExternalColumn> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_external_column(&text)
}
