//! Single-view labeled dataset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense feature matrix with one class label per row.
///
/// Features are stored row-major. Labels are contiguous class ids in
/// `0..n_classes`. Construction rejects non-finite feature values, so a
/// valid `Dataset` never carries missing data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    n_classes: usize,
}

impl Dataset {
    /// Builds a dataset from a row-major feature buffer.
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::invalid("dataset must have at least one feature"));
        }
        if labels.len() < 2 {
            return Err(Error::invalid(format!(
                "dataset must have at least 2 samples, got {}",
                labels.len()
            )));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::invalid(format!(
                "feature buffer has {} values, expected {} samples x {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature value at row {}, feature {}",
                pos / n_features,
                pos % n_features
            )));
        }
        if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= n_classes) {
            return Err(Error::invalid(format!(
                "label {label} at row {row} is out of range for {n_classes} classes"
            )));
        }
        Ok(Self {
            features,
            n_features,
            labels,
            n_classes,
        })
    }

    /// Builds a dataset from per-sample feature rows.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_features) {
            return Err(Error::invalid(format!(
                "row {i} has {} features, expected {n_features}",
                row.len()
            )));
        }
        let features = rows.iter().flatten().copied().collect();
        Self::new(features, n_features, labels, n_classes)
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// A new dataset containing the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_samples()) {
            return Err(Error::invalid(format!(
                "subset row {bad} out of range for {} samples",
                self.n_samples()
            )));
        }
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        Self::new(features, self.n_features, labels, self.n_classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_features() {
        let err = Dataset::new(vec![1.0, f64::NAN], 1, vec![0, 1], 2).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn rejects_out_of_range_label() {
        let err = Dataset::new(vec![1.0, 2.0], 1, vec![0, 2], 2).unwrap_err();
        assert!(err.to_string().contains("label 2"));
    }

    #[test]
    fn rejects_single_sample() {
        assert!(Dataset::new(vec![1.0], 1, vec![0], 1).is_err());
    }

    #[test]
    fn subset_preserves_order() {
        let data = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 1, vec![0, 1, 0, 1], 2).unwrap();
        let sub = data.subset(&[3, 0]).unwrap();
        assert_eq!(sub.row(0), &[4.0]);
        assert_eq!(sub.row(1), &[1.0]);
        assert_eq!(sub.labels(), &[1, 0]);
    }
}
