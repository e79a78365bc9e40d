//! Delimited-table ingestion driven by a view manifest.

use std::path::Path;

use csv::ReaderBuilder;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::io::manifest::{ResolvedManifest, ViewManifest};
use crate::multiview::MultiViewDataset;

/// Label ids assigned during ingestion, in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMapping {
    /// `classes[j]` is the table value mapped to class id `j`.
    pub classes: Vec<String>,
}

/// Loads a labelled delimited table into a multi-view dataset.
///
/// Label values are mapped to contiguous class ids in order of first
/// appearance; the mapping is returned so reports can name classes.
/// Feature cells must parse as finite reals, and parse failures report
/// the table line and column.
pub fn load_dataset(
    path: impl AsRef<Path>,
    manifest: &ViewManifest,
) -> Result<(MultiViewDataset, LabelMapping)> {
    let (header, records) = read_records(path.as_ref(), manifest)?;
    let resolved = manifest.resolve(&header)?;
    let label_idx = resolved.label.expect("resolve always yields a label");

    let mut classes: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(records.len());
    let mut buffers: Vec<Vec<f64>> = resolved
        .views
        .iter()
        .map(|cols| Vec::with_capacity(cols.len() * records.len()))
        .collect();

    for (record, line) in &records {
        let raw = record.get(label_idx).unwrap_or("").trim();
        if raw.is_empty() {
            return Err(Error::ingestion(
                Some(*line),
                Some(&header[label_idx]),
                "empty label",
            ));
        }
        let id = match classes.iter().position(|c| c == raw) {
            Some(id) => id,
            None => {
                classes.push(raw.to_string());
                classes.len() - 1
            }
        };
        labels.push(id);
        for (view, buffer) in resolved.views.iter().zip(&mut buffers) {
            fill_features(record, view, &header, *line, buffer)?;
        }
    }

    let n_classes = classes.len();
    let views = resolved
        .views
        .iter()
        .zip(buffers)
        .map(|(cols, buffer)| Dataset::new(buffer, cols.len(), labels.clone(), n_classes))
        .collect::<Result<Vec<_>>>()?;
    let data = MultiViewDataset::new(views)?
        .with_name(&manifest.name)
        .with_view_names(resolved.view_names.clone())?
        .with_class_names(classes.clone())?;
    Ok((data, LabelMapping { classes }))
}

/// Loads an unlabelled query table: one per-view feature block per row.
/// The manifest's label column may be absent; when present it is
/// ignored.
pub fn load_query_rows(
    path: impl AsRef<Path>,
    manifest: &ViewManifest,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let (header, records) = read_records(path.as_ref(), manifest)?;
    let resolved: ResolvedManifest = manifest.resolve_features(&header)?;
    let mut rows = Vec::with_capacity(records.len());
    for (record, line) in &records {
        let mut sample = Vec::with_capacity(resolved.views.len());
        for view in &resolved.views {
            let mut block = Vec::with_capacity(view.len());
            fill_features(record, view, &header, *line, &mut block)?;
            sample.push(block);
        }
        rows.push(sample);
    }
    Ok(rows)
}

/// Header names plus every record paired with its file line number.
type NumberedRecords = (Vec<String>, Vec<(csv::StringRecord, usize)>);

fn read_records(path: &Path, manifest: &ViewManifest) -> Result<NumberedRecords> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = ReaderBuilder::new()
        .delimiter(manifest.delimiter_byte())
        .has_headers(true)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut records = Vec::new();
    for result in reader.records() {
        let record = result?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(records.len() + 2);
        records.push((record, line));
    }
    Ok((header, records))
}

fn fill_features(
    record: &csv::StringRecord,
    columns: &[usize],
    header: &[String],
    line: usize,
    out: &mut Vec<f64>,
) -> Result<()> {
    for &c in columns {
        let cell = record.get(c).unwrap_or("").trim();
        let value: f64 = cell.parse().map_err(|_| {
            Error::ingestion(
                Some(line),
                Some(&header[c]),
                format!("expected a numeric feature, got '{cell}'"),
            )
        })?;
        if !value.is_finite() {
            return Err(Error::ingestion(
                Some(line),
                Some(&header[c]),
                format!("non-finite feature value '{cell}'"),
            ));
        }
        out.push(value);
    }
    Ok(())
}
