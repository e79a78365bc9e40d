//! Random forests: bagged CART trees with an out-of-bag ledger.

mod tree;

pub use tree::{train_tree, DecisionTree, Node};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// Forest hyperparameters.
///
/// `max_features = None` resolves to `floor(sqrt(d))` (at least 1) for a
/// `d`-feature dataset at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 500,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n_trees(mut self, n_trees: usize) -> Self {
        self.n_trees = n_trees;
        self
    }

    pub(crate) fn resolved_max_features(&self, n_features: usize) -> Result<usize> {
        match self.max_features {
            None => Ok(((n_features as f64).sqrt().floor() as usize).max(1)),
            Some(m) if m >= 1 && m <= n_features => Ok(m),
            Some(m) => Err(Error::invalid(format!(
                "max_features {m} must be in 1..={n_features}"
            ))),
        }
    }

    /// Checks the data-independent invariants; `max_features` bounds are
    /// checked against the dataset at training time.
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        if self.max_features == Some(0) {
            return Err(Error::invalid("max_features must be at least 1"));
        }
        Ok(())
    }

    fn validate_for(&self, n_features: usize) -> Result<()> {
        self.validate()?;
        self.resolved_max_features(n_features)?;
        Ok(())
    }
}

/// A trained forest plus the per-tree bootstrap membership masks.
///
/// `inbag[k][i]` is true when training row `i` was drawn into tree `k`'s
/// bootstrap at least once (the mask records distinct membership; each
/// bootstrap itself has exactly `n` draws with replacement). Immutable
/// after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    inbag: Vec<Vec<bool>>,
    n_features: usize,
    n_classes: usize,
}

/// Trains `config.n_trees` trees on bootstrap resamples of `data`.
///
/// Tree `k` draws its bootstrap and its feature subsamples from an RNG
/// stream derived from `(config.seed, k)`, so retraining with the same
/// inputs is bit-identical regardless of how the per-tree work is
/// scheduled across threads.
pub fn train_forest(data: &Dataset, config: &ForestConfig) -> Result<RandomForest> {
    config.validate_for(data.n_features())?;
    let n = data.n_samples();
    let trained: Vec<(DecisionTree, Vec<bool>)> = (0..config.n_trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::stream_rng(config.seed, seed::STREAM_TREE, k as u64);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut mask = vec![false; n];
            for &i in &bootstrap {
                mask[i] = true;
            }
            let tree = tree::train_tree_with_rng(data, &bootstrap, config, rng)?;
            Ok((tree, mask))
        })
        .collect::<Result<_>>()?;
    let (trees, inbag) = trained.into_iter().unzip();
    RandomForest::from_parts(trees, inbag, data.n_classes())
}

impl RandomForest {
    /// Reassembles a forest from trees and inbag masks, validating that
    /// shapes agree and every leaf histogram covers `n_classes`.
    pub fn from_parts(
        trees: Vec<DecisionTree>,
        inbag: Vec<Vec<bool>>,
        n_classes: usize,
    ) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::invalid("forest must have at least one tree"));
        }
        if trees.len() != inbag.len() {
            return Err(Error::invalid(format!(
                "{} trees but {} inbag rows",
                trees.len(),
                inbag.len()
            )));
        }
        let n_features = trees[0].n_features();
        if trees.iter().any(|t| t.n_features() != n_features) {
            return Err(Error::invalid("trees disagree on feature count"));
        }
        let n = inbag[0].len();
        if inbag.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("inbag rows disagree on sample count"));
        }
        for (k, tree) in trees.iter().enumerate() {
            for node in tree.nodes() {
                if let Node::Leaf { counts, .. } = node {
                    if counts.len() != n_classes {
                        return Err(Error::invalid(format!(
                            "tree {k} has a leaf histogram over {} classes, expected {n_classes}",
                            counts.len()
                        )));
                    }
                }
            }
        }
        Ok(Self {
            trees,
            inbag,
            n_features,
            n_classes,
        })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree(&self, k: usize) -> &DecisionTree {
        &self.trees[k]
    }

    /// Per-tree bootstrap membership masks, one row per tree.
    pub fn inbag(&self) -> &[Vec<bool>] {
        &self.inbag
    }

    /// Number of training rows the inbag ledger covers.
    pub fn n_train(&self) -> usize {
        self.inbag[0].len()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::dimension("forest input", self.n_features, x.len()));
        }
        Ok(())
    }

    /// Mean predicted class probabilities over all trees; each tree
    /// contributes its leaf class fractions for `x`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut acc = vec![0.0; self.n_classes];
        for tree in &self.trees {
            tree.accumulate_proba(x, &mut acc);
        }
        let m = self.trees.len() as f64;
        for a in &mut acc {
            *a /= m;
        }
        Ok(acc)
    }

    /// Most probable class for `x`; ties go to the smallest class id.
    pub fn predict_label(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax_tie_smallest(&self.predict_proba(x)?))
    }

    /// Prediction of the sub-forest of trees that did not see training
    /// row `i` in their bootstrap. `None` when row `i` is in-bag
    /// everywhere (no sub-forest exists).
    pub fn oob_subforest_predict(&self, data: &Dataset, i: usize) -> Result<Option<usize>> {
        self.check_train_data(data)?;
        if i >= data.n_samples() {
            return Err(Error::invalid(format!(
                "training index {i} out of range for {} samples",
                data.n_samples()
            )));
        }
        let x = data.row(i);
        let mut acc = vec![0.0; self.n_classes];
        let mut n_oob = 0usize;
        for (tree, mask) in self.trees.iter().zip(&self.inbag) {
            if !mask[i] {
                tree.accumulate_proba(x, &mut acc);
                n_oob += 1;
            }
        }
        if n_oob == 0 {
            return Ok(None);
        }
        Ok(Some(argmax_tie_smallest(&acc)))
    }

    /// Fraction of training rows whose sub-forest prediction matches
    /// their label. Rows without a sub-forest are excluded from both
    /// numerator and denominator.
    pub fn oob_accuracy(&self, data: &Dataset) -> Result<f64> {
        self.oob_accuracy_over(data, 0..data.n_samples())
    }

    /// [`oob_accuracy`](Self::oob_accuracy) restricted to `subset`. Falls
    /// back to the full out-of-bag accuracy when every subset row lacks a
    /// sub-forest.
    pub fn oob_accuracy_subset(&self, data: &Dataset, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::invalid("subset must not be empty"));
        }
        match self.oob_accuracy_over(data, subset.iter().copied()) {
            Err(Error::UndefinedOobAccuracy) => self.oob_accuracy(data),
            other => other,
        }
    }

    fn oob_accuracy_over(
        &self,
        data: &Dataset,
        rows: impl IntoIterator<Item = usize>,
    ) -> Result<f64> {
        let mut evaluated = 0usize;
        let mut correct = 0usize;
        for i in rows {
            if let Some(pred) = self.oob_subforest_predict(data, i)? {
                evaluated += 1;
                if pred == data.label(i) {
                    correct += 1;
                }
            }
        }
        if evaluated == 0 {
            return Err(Error::UndefinedOobAccuracy);
        }
        Ok(correct as f64 / evaluated as f64)
    }

    /// Mean over trees of the fraction of training rows left out of the
    /// tree's bootstrap.
    pub fn mean_oob_fraction(&self) -> f64 {
        let n = self.n_train() as f64;
        let per_tree: f64 = self
            .inbag
            .iter()
            .map(|mask| mask.iter().filter(|&&b| !b).count() as f64 / n)
            .sum();
        per_tree / self.trees.len() as f64
    }

    fn check_train_data(&self, data: &Dataset) -> Result<()> {
        if data.n_samples() != self.n_train() {
            return Err(Error::invalid(format!(
                "dataset has {} rows but the inbag ledger covers {}",
                data.n_samples(),
                self.n_train()
            )));
        }
        self.check_dim(data.row(0))
    }
}

/// Index of the largest value; ties resolve to the smallest index.
pub fn argmax_tie_smallest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
