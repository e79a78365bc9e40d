//! Random forest dissimilarity (RFD) and neighborhood retrieval.
//!
//! Two samples have per-tree dissimilarity 0 when they land in the same
//! leaf and 1 otherwise; RFD is the average over all trees. The
//! neighborhood of a query is the set of training rows with the smallest
//! RFD to it, which local dynamic voting scores with the out-of-bag
//! ledger.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::forest::RandomForest;

/// Nearest training rows to a query under RFD, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    /// Training-row indices ordered ascending by `(rfd, index)`.
    pub indices: Vec<usize>,
    /// RFD of each listed row to the query, aligned with `indices`.
    pub dissimilarities: Vec<f64>,
    /// View that produced this neighborhood, when known.
    pub view: Option<usize>,
}

/// RFD between two samples: the fraction of trees routing them to
/// different leaves.
pub fn rfd(forest: &RandomForest, a: &[f64], b: &[f64]) -> Result<f64> {
    let mut mismatches = 0usize;
    for tree in forest.trees() {
        if tree.leaf_id(a)? != tree.leaf_id(b)? {
            mismatches += 1;
        }
    }
    Ok(mismatches as f64 / forest.n_trees() as f64)
}

/// RFD from `x` to every training row, as a length-`n` vector.
pub fn rfd_to_training(forest: &RandomForest, train: &Dataset, x: &[f64]) -> Result<Vec<f64>> {
    let counts = mismatch_counts(forest, &query_leaves(forest, x)?, train)?;
    let m = forest.n_trees() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / m).collect())
}

/// The `n_neighbor` training rows nearest to `x` under RFD, ties broken
/// by smaller row index. Clamps to the training size.
pub fn neighborhood(
    forest: &RandomForest,
    train: &Dataset,
    x: &[f64],
    n_neighbor: usize,
) -> Result<Neighborhood> {
    if n_neighbor == 0 {
        return Err(Error::invalid("n_neighbor must be at least 1"));
    }
    let counts = mismatch_counts(forest, &query_leaves(forest, x)?, train)?;
    Ok(select_nearest(&counts, forest.n_trees(), n_neighbor))
}

/// Per-tree leaf ids of every training row, computed once so repeated
/// queries cost one routing of the query plus integer comparisons.
#[derive(Debug, Clone)]
pub struct RfdCache {
    /// `leaf_ids[k][i]` = leaf of training row `i` in tree `k`.
    leaf_ids: Vec<Vec<u32>>,
}

impl RfdCache {
    /// Routes every training row through every tree of `forest`.
    pub fn build(forest: &RandomForest, train: &Dataset) -> Result<Self> {
        let mut leaf_ids = Vec::with_capacity(forest.n_trees());
        for tree in forest.trees() {
            let mut row = Vec::with_capacity(train.n_samples());
            for i in 0..train.n_samples() {
                row.push(tree.leaf_id(train.row(i))? as u32);
            }
            leaf_ids.push(row);
        }
        Ok(Self { leaf_ids })
    }

    /// Equivalent to [`neighborhood`] against the cached training rows.
    pub fn neighborhood(
        &self,
        forest: &RandomForest,
        x: &[f64],
        n_neighbor: usize,
    ) -> Result<Neighborhood> {
        if n_neighbor == 0 {
            return Err(Error::invalid("n_neighbor must be at least 1"));
        }
        let query = query_leaves(forest, x)?;
        let n = self.leaf_ids[0].len();
        let mut counts = vec![0u32; n];
        for (tree_row, &q) in self.leaf_ids.iter().zip(&query) {
            for (count, &leaf) in counts.iter_mut().zip(tree_row) {
                *count += u32::from(leaf != q);
            }
        }
        Ok(select_nearest(&counts, forest.n_trees(), n_neighbor))
    }
}

fn query_leaves(forest: &RandomForest, x: &[f64]) -> Result<Vec<u32>> {
    forest
        .trees()
        .iter()
        .map(|tree| tree.leaf_id(x).map(|id| id as u32))
        .collect()
}

fn mismatch_counts(forest: &RandomForest, query: &[u32], train: &Dataset) -> Result<Vec<u32>> {
    let mut counts = vec![0u32; train.n_samples()];
    for (tree, &q) in forest.trees().iter().zip(query) {
        for (i, count) in counts.iter_mut().enumerate() {
            *count += u32::from(tree.leaf_id(train.row(i))? as u32 != q);
        }
    }
    Ok(counts)
}

fn select_nearest(counts: &[u32], n_trees: usize, n_neighbor: usize) -> Neighborhood {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_unstable_by_key(|&i| (counts[i], i));
    order.truncate(n_neighbor.min(counts.len()));
    let dissimilarities = order
        .iter()
        .map(|&i| counts[i] as f64 / n_trees as f64)
        .collect();
    Neighborhood {
        indices: order,
        dissimilarities,
        view: None,
    }
}
