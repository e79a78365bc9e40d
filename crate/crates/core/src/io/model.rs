//! Model persistence: a versioned JSON container holding the training
//! configuration, the retained training views, and every forest's node
//! arrays plus inbag masks (packed as 0/1 strings).
//!
//! Loading re-validates everything through the same constructors used
//! at training time and rebuilds the derived caches, so a loaded model
//! predicts bit-identically to the one that was saved.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{DecisionTree, ForestConfig, Node, RandomForest};
use crate::multiview::{MultiViewDataset, ViewEnsemble};

const FORMAT: &str = "mvrf-model";
const MAJOR: u32 = 1;
const MINOR: u32 = 0;

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    major: u32,
    minor: u32,
    config: ForestConfig,
    train: MultiViewDataset,
    forests: Vec<ForestRecord>,
}

#[derive(Serialize, Deserialize)]
struct ForestRecord {
    n_features: usize,
    n_classes: usize,
    trees: Vec<TreeRecord>,
    /// One string per tree; character `i` is '1' when training row `i`
    /// was in the tree's bootstrap.
    inbag: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct TreeRecord {
    nodes: Vec<Node>,
}

/// Minimal first-pass parse: enough to reject foreign files and
/// incompatible majors before touching the payload.
#[derive(Deserialize)]
struct Probe {
    format: String,
    major: u32,
}

/// Serializes `ensemble` into the JSON container format.
pub fn write_model(ensemble: &ViewEnsemble, writer: impl Write) -> Result<()> {
    let forests = ensemble
        .forests()
        .iter()
        .map(|forest| ForestRecord {
            n_features: forest.n_features(),
            n_classes: forest.n_classes(),
            trees: forest
                .trees()
                .iter()
                .map(|tree| TreeRecord {
                    nodes: tree.nodes().to_vec(),
                })
                .collect(),
            inbag: forest
                .inbag()
                .iter()
                .map(|mask| encode_mask(mask))
                .collect(),
        })
        .collect();
    let container = Container {
        format: FORMAT.to_string(),
        major: MAJOR,
        minor: MINOR,
        config: ensemble.config().clone(),
        train: ensemble.train_data().clone(),
        forests,
    };
    serde_json::to_writer(writer, &container)
        .map_err(|e| Error::ModelFormat(format!("write failed: {e}")))
}

/// Parses a JSON container and rebuilds the ensemble, re-validating
/// trees, forests, and shapes.
pub fn read_model(mut reader: impl Read) -> Result<ViewEnsemble> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let probe: Probe = serde_json::from_slice(&bytes)
        .map_err(|e| Error::ModelFormat(format!("unreadable header: {e}")))?;
    if probe.format != FORMAT {
        return Err(Error::ModelFormat(format!(
            "not a {FORMAT} container (found format '{}')",
            probe.format
        )));
    }
    if probe.major != MAJOR {
        return Err(Error::VersionMismatch {
            found: probe.major,
            supported: MAJOR,
        });
    }
    let container: Container =
        serde_json::from_slice(&bytes).map_err(|e| Error::ModelFormat(e.to_string()))?;
    rebuild(container).map_err(|e| match e {
        Error::ModelFormat(_) | Error::VersionMismatch { .. } => e,
        other => Error::ModelFormat(other.to_string()),
    })
}

pub fn save_model(ensemble: &ViewEnsemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    write_model(ensemble, std::io::BufWriter::new(file))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ViewEnsemble> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    read_model(std::io::BufReader::new(file))
}

fn rebuild(container: Container) -> Result<ViewEnsemble> {
    let mut forests = Vec::with_capacity(container.forests.len());
    for record in container.forests {
        let trees = record
            .trees
            .into_iter()
            .map(|t| DecisionTree::from_nodes(t.nodes, record.n_features))
            .collect::<Result<Vec<_>>>()?;
        let inbag = record
            .inbag
            .iter()
            .map(|s| decode_mask(s))
            .collect::<Result<Vec<_>>>()?;
        forests.push(RandomForest::from_parts(trees, inbag, record.n_classes)?);
    }
    ViewEnsemble::from_parts(forests, container.train, container.config)
}

fn encode_mask(mask: &[bool]) -> String {
    mask.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn decode_mask(text: &str) -> Result<Vec<bool>> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::ModelFormat(format!(
                "inbag mask holds '{other}', expected only 0 and 1"
            ))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::multiview::train_multiview;
    use crate::voting::Combiner;

    fn small_ensemble() -> (MultiViewDataset, ViewEnsemble) {
        let n = 12;
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i % 2 == 1)).collect();
        let v0: Vec<f64> = (0..n).map(|i| i as f64 + 10.0 * labels[i] as f64).collect();
        let v1: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let data = MultiViewDataset::new(vec![
            Dataset::new(v0, 1, labels.clone(), 2).unwrap(),
            Dataset::new(v1, 1, labels, 2).unwrap(),
        ])
        .unwrap();
        let config = ForestConfig::default().with_n_trees(12).with_seed(5);
        let ensemble = train_multiview(&data, &config).unwrap();
        (data, ensemble)
    }

    fn saved_bytes(ensemble: &ViewEnsemble) -> Vec<u8> {
        let mut bytes = Vec::new();
        write_model(ensemble, &mut bytes).unwrap();
        bytes
    }

    #[test]
    fn round_trip_preserves_predictions_exactly() {
        let (data, ensemble) = small_ensemble();
        let loaded = read_model(saved_bytes(&ensemble).as_slice()).unwrap();
        assert_eq!(loaded.forests(), ensemble.forests());
        assert_eq!(loaded.static_weights(), ensemble.static_weights());
        for i in 0..data.n_samples() {
            for combiner in [
                Combiner::Majority,
                Combiner::GlobalDynamic,
                Combiner::GlobalLocalDynamic,
            ] {
                let before = ensemble.predict(&data.sample(i), combiner, 3).unwrap();
                let after = loaded.predict(&data.sample(i), combiner, 3).unwrap();
                assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn truncated_container_is_rejected() {
        let (_, ensemble) = small_ensemble();
        let bytes = saved_bytes(&ensemble);
        let err = read_model(&bytes[..bytes.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)), "{err}");
    }

    #[test]
    fn foreign_format_is_rejected() {
        let err = read_model(br#"{"format":"something-else","major":1}"#.as_slice()).unwrap_err();
        assert!(err.to_string().contains("something-else"), "{err}");
    }

    #[test]
    fn wrong_major_version_names_both() {
        let (_, ensemble) = small_ensemble();
        let text = String::from_utf8(saved_bytes(&ensemble)).unwrap();
        let bumped = text.replace("\"major\":1", "\"major\":3");
        let err = read_model(bumped.as_bytes()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::VersionMismatch {
                    found: 3,
                    supported: 1
                }
            ),
            "{err}"
        );
        let msg = err.to_string();
        assert!(msg.contains('3') && msg.contains('1'), "{msg}");
    }

    #[test]
    fn corrupt_inbag_character_is_rejected() {
        let (_, ensemble) = small_ensemble();
        let text = String::from_utf8(saved_bytes(&ensemble)).unwrap();
        let start = text.find("\"inbag\":[\"").unwrap() + "\"inbag\":[\"".len();
        let mut corrupted = text.clone();
        corrupted.replace_range(start..start + 1, "x");
        let err = read_model(corrupted.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)), "{err}");
    }

    #[test]
    fn tampered_tree_structure_is_rejected() {
        let (_, ensemble) = small_ensemble();
        let text = String::from_utf8(saved_bytes(&ensemble)).unwrap();
        // Repoint every leaf id 1 to 7, breaking dense leaf numbering.
        let tampered = text.replace("{\"Leaf\":{\"id\":1,", "{\"Leaf\":{\"id\":7,");
        assert_ne!(tampered, text);
        let err = read_model(tampered.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)), "{err}");
    }
}
