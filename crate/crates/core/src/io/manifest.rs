//! View manifests: TOML files mapping table columns onto views.
//!
//! A manifest names the dataset, its label column, and one `[[view]]`
//! block per view. Each view lists its feature columns either
//! explicitly (`columns = [...]`) or as an inclusive span in header
//! order (`range = ["first", "last"]`), which keeps manifests short for
//! tables with thousands of columns:
//!
//! ```toml
//! name = "toy"
//! label = "outcome"
//!
//! [[view]]
//! name = "texture"
//! columns = ["t1", "t2"]
//!
//! [[view]]
//! name = "intensity"
//! range = ["i_first", "i_last"]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// One view's column selection.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ViewSpec {
    pub name: String,
    /// Explicit feature column names.
    #[serde(default)]
    pub columns: Option<Vec<String>>,
    /// Inclusive `[first, last]` span in header order.
    #[serde(default)]
    pub range: Option<[String; 2]>,
}

/// Parsed manifest describing how a delimited table splits into views.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ViewManifest {
    pub name: String,
    /// Name of the label column.
    pub label: String,
    /// Field delimiter; a single character, comma by default.
    #[serde(default)]
    pub delimiter: Option<char>,
    /// Free-text provenance notes, echoed nowhere but kept with the data.
    #[serde(default)]
    pub notes: Option<String>,
    #[serde(rename = "view")]
    pub views: Vec<ViewSpec>,
}

impl std::str::FromStr for ViewManifest {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let manifest: ViewManifest = toml::from_str(text)
            .map_err(|e| Error::ingestion(None, None, format!("manifest: {e}")))?;
        manifest.validate()?;
        Ok(manifest)
    }
}

impl ViewManifest {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        text.parse()
    }

    pub fn delimiter_byte(&self) -> u8 {
        self.delimiter.unwrap_or(',') as u8
    }

    fn validate(&self) -> Result<()> {
        if self.views.is_empty() {
            return Err(Error::ingestion(None, None, "manifest declares no views"));
        }
        if let Some(d) = self.delimiter {
            if !d.is_ascii() {
                return Err(Error::ingestion(
                    None,
                    None,
                    format!("delimiter '{d}' is not a single ASCII character"),
                ));
            }
        }
        for (q, view) in self.views.iter().enumerate() {
            if self.views[..q].iter().any(|other| other.name == view.name) {
                return Err(Error::ingestion(
                    None,
                    None,
                    format!("view name '{}' declared twice", view.name),
                ));
            }
            match (&view.columns, &view.range) {
                (Some(cols), None) if !cols.is_empty() => {}
                (None, Some(_)) => {}
                (Some(_), Some(_)) => {
                    return Err(Error::ingestion(
                        None,
                        None,
                        format!("view '{}' declares both columns and range", view.name),
                    ));
                }
                _ => {
                    return Err(Error::ingestion(
                        None,
                        None,
                        format!("view '{}' declares no columns", view.name),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Resolves the label column and each view's columns against a table
    /// header, enforcing that referenced columns exist, are unambiguous,
    /// and that no column is claimed twice.
    pub fn resolve(&self, header: &[String]) -> Result<ResolvedManifest> {
        let resolved = self.resolve_impl(header, true)?;
        Ok(resolved)
    }

    /// As [`resolve`](Self::resolve), but for unlabelled query tables:
    /// the label column may be absent (and is ignored when present).
    pub fn resolve_features(&self, header: &[String]) -> Result<ResolvedManifest> {
        self.resolve_impl(header, false)
    }

    fn resolve_impl(&self, header: &[String], require_label: bool) -> Result<ResolvedManifest> {
        let find = |name: &str| -> Result<usize> {
            let mut hits = header
                .iter()
                .enumerate()
                .filter(|(_, h)| h.as_str() == name);
            match (hits.next(), hits.next()) {
                (Some((i, _)), None) => Ok(i),
                (None, _) => Err(Error::ingestion(
                    None,
                    Some(name),
                    "column not found in table header",
                )),
                (Some(_), Some(_)) => Err(Error::ingestion(
                    None,
                    Some(name),
                    "column name appears more than once in table header",
                )),
            }
        };

        let label = if require_label || header.iter().any(|h| h == &self.label) {
            Some(find(&self.label)?)
        } else {
            None
        };
        let mut claimed = vec![false; header.len()];
        if let Some(label) = label {
            claimed[label] = true;
        }
        let mut views = Vec::with_capacity(self.views.len());
        for view in &self.views {
            let indices: Vec<usize> = match (&view.columns, &view.range) {
                (Some(cols), None) => cols.iter().map(|c| find(c)).collect::<Result<_>>()?,
                (None, Some([first, last])) => {
                    let start = find(first)?;
                    let end = find(last)?;
                    if start > end {
                        return Err(Error::ingestion(
                            None,
                            Some(first),
                            format!("range start comes after '{last}' in the header"),
                        ));
                    }
                    (start..=end).collect()
                }
                _ => unreachable!("validated at parse"),
            };
            for &i in &indices {
                if claimed[i] {
                    return Err(Error::ingestion(
                        None,
                        Some(&header[i]),
                        "column claimed by more than one view (or by the label)",
                    ));
                }
                claimed[i] = true;
            }
            views.push(indices);
        }
        Ok(ResolvedManifest {
            label,
            views,
            view_names: self.views.iter().map(|v| v.name.clone()).collect(),
        })
    }
}

/// Column indices of the label and each view within one table header.
/// `label` is `None` only when resolved for an unlabelled query table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedManifest {
    pub label: Option<usize>,
    pub views: Vec<Vec<usize>>,
    pub view_names: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"
name = "toy"
label = "outcome"

[[view]]
name = "texture"
columns = ["t1", "t2"]

[[view]]
name = "intensity"
range = ["i1", "i3"]
"#;

    fn header(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn toy_manifest_resolves() {
        let manifest = TOY.parse::<ViewManifest>().unwrap();
        assert_eq!(manifest.name, "toy");
        assert_eq!(manifest.delimiter_byte(), b',');
        let resolved = manifest
            .resolve(&header(&["outcome", "t1", "t2", "i1", "i2", "i3"]))
            .unwrap();
        assert_eq!(resolved.label, Some(0));
        assert_eq!(resolved.views, vec![vec![1, 2], vec![3, 4, 5]]);
        assert_eq!(resolved.view_names, vec!["texture", "intensity"]);
    }

    #[test]
    fn missing_column_names_the_column() {
        let manifest = TOY.parse::<ViewManifest>().unwrap();
        let err = manifest
            .resolve(&header(&["outcome", "t1", "i1", "i2", "i3"]))
            .unwrap_err()
            .to_string();
        assert!(err.contains("t2"), "{err}");
    }

    #[test]
    fn overlapping_views_are_rejected() {
        let text = r#"
name = "bad"
label = "y"
[[view]]
name = "a"
columns = ["f1", "f2"]
[[view]]
name = "b"
range = ["f2", "f3"]
"#;
        let manifest = text.parse::<ViewManifest>().unwrap();
        let err = manifest
            .resolve(&header(&["y", "f1", "f2", "f3"]))
            .unwrap_err()
            .to_string();
        assert!(err.contains("f2"), "{err}");
    }

    #[test]
    fn label_inside_a_range_is_rejected() {
        let text = r#"
name = "bad"
label = "y"
[[view]]
name = "a"
range = ["f1", "f2"]
"#;
        let manifest = text.parse::<ViewManifest>().unwrap();
        assert!(manifest.resolve(&header(&["f1", "y", "f2"])).is_err());
    }

    #[test]
    fn view_without_columns_is_rejected() {
        let text = r#"
name = "bad"
label = "y"
[[view]]
name = "empty"
"#;
        assert!(text.parse::<ViewManifest>().is_err());
    }

    #[test]
    fn inverted_range_is_rejected() {
        let text = r#"
name = "bad"
label = "y"
[[view]]
name = "a"
range = ["f3", "f1"]
"#;
        let manifest = text.parse::<ViewManifest>().unwrap();
        assert!(manifest.resolve(&header(&["y", "f1", "f2", "f3"])).is_err());
    }

    #[test]
    fn query_tables_may_omit_the_label() {
        let manifest = TOY.parse::<ViewManifest>().unwrap();
        let resolved = manifest
            .resolve_features(&header(&["t1", "t2", "i1", "i2", "i3"]))
            .unwrap();
        assert_eq!(resolved.label, None);
        assert_eq!(resolved.views, vec![vec![0, 1], vec![2, 3, 4]]);
        assert!(manifest
            .resolve(&header(&["t1", "t2", "i1", "i2", "i3"]))
            .is_err());
    }

    #[test]
    fn tab_delimiter_round_trips() {
        let text = "name = \"t\"\nlabel = \"y\"\ndelimiter = \"\\t\"\n[[view]]\nname = \"a\"\ncolumns = [\"f\"]\n";
        let manifest = text.parse::<ViewManifest>().unwrap();
        assert_eq!(manifest.delimiter_byte(), b'\t');
    }
}
