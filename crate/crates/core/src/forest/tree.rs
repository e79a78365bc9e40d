//! CART-style classification tree grown with random feature selection.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::forest::ForestConfig;

/// A tree node. Split nodes route `x[feature] <= threshold` to `left`,
/// everything else to `right`. Leaves carry the class histogram of the
/// bootstrap samples that reached them and a dense leaf id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        id: usize,
        counts: Vec<usize>,
    },
}

/// A trained decision tree stored as a node array with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
    n_leaves: usize,
}

impl DecisionTree {
    /// Reassembles a tree from a node array, validating its structure:
    /// children must point forward in the array, every node must be
    /// reachable exactly once from the root, and leaf ids must be the
    /// dense set `0..n_leaves`.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("tree must have at least one node"));
        }
        if n_features == 0 {
            return Err(Error::invalid("tree must cover at least one feature"));
        }
        let mut visited = vec![false; nodes.len()];
        let mut leaf_ids = Vec::new();
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            if visited[idx] {
                return Err(Error::invalid(format!("node {idx} reachable twice")));
            }
            visited[idx] = true;
            match &nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= n_features {
                        return Err(Error::invalid(format!(
                            "split on feature {feature} but tree has {n_features} features"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::invalid("non-finite split threshold"));
                    }
                    for &child in [left, right] {
                        if child <= idx || child >= nodes.len() {
                            return Err(Error::invalid(format!(
                                "node {idx} has out-of-order child {child}"
                            )));
                        }
                    }
                    stack.push(*left);
                    stack.push(*right);
                }
                Node::Leaf { id, counts } => {
                    if counts.is_empty() || counts.iter().sum::<usize>() == 0 {
                        return Err(Error::invalid(format!("leaf {idx} has an empty histogram")));
                    }
                    leaf_ids.push(*id);
                }
            }
        }
        if let Some(unreachable) = visited.iter().position(|v| !v) {
            return Err(Error::invalid(format!("node {unreachable} unreachable")));
        }
        let n_leaves = leaf_ids.len();
        leaf_ids.sort_unstable();
        if leaf_ids != (0..n_leaves).collect::<Vec<_>>() {
            return Err(Error::invalid("leaf ids are not dense 0..n_leaves"));
        }
        Ok(Self {
            nodes,
            n_features,
            n_leaves,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Number of leaves; leaf ids run `0..n_leaves()`.
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::dimension("tree input", self.n_features, x.len()));
        }
        Ok(())
    }

    fn route(&self, x: &[f64]) -> &Node {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                leaf => return leaf,
            }
        }
    }

    /// Dense id of the leaf that `x` routes to.
    pub fn leaf_id(&self, x: &[f64]) -> Result<usize> {
        self.check_dim(x)?;
        match self.route(x) {
            Node::Leaf { id, .. } => Ok(*id),
            Node::Split { .. } => unreachable!("route always ends at a leaf"),
        }
    }

    /// Class histogram of the leaf that `x` routes to.
    pub fn leaf_counts(&self, x: &[f64]) -> Result<&[usize]> {
        self.check_dim(x)?;
        match self.route(x) {
            Node::Leaf { counts, .. } => Ok(counts),
            Node::Split { .. } => unreachable!("route always ends at a leaf"),
        }
    }

    /// Adds this tree's leaf class fractions for `x` into `acc`.
    pub(crate) fn accumulate_proba(&self, x: &[f64], acc: &mut [f64]) {
        if let Node::Leaf { counts, .. } = self.route(x) {
            let total = counts.iter().sum::<usize>() as f64;
            for (a, &c) in acc.iter_mut().zip(counts) {
                *a += c as f64 / total;
            }
        }
    }
}

/// Grows one tree on a bootstrap multiset of `data` rows.
///
/// Greedy CART growth: at every node `max_features` candidate features
/// are drawn without replacement, thresholds are placed at midpoints of
/// consecutive distinct values, and the split minimizing weighted Gini
/// impurity wins. Ties go to the smaller feature index, then the smaller
/// threshold. A node becomes a leaf when it is pure, smaller than
/// `min_samples_split`, at `max_depth`, or when no candidate split
/// strictly reduces impurity.
pub fn train_tree(
    data: &Dataset,
    bootstrap: &[usize],
    config: &ForestConfig,
    tree_seed: u64,
) -> Result<DecisionTree> {
    train_tree_with_rng(
        data,
        bootstrap,
        config,
        ChaCha8Rng::seed_from_u64(tree_seed),
    )
}

/// As [`train_tree`], but continuing an already-positioned RNG stream.
/// Forest training uses this so one per-tree stream covers both the
/// bootstrap draw and feature sampling.
pub(crate) fn train_tree_with_rng(
    data: &Dataset,
    bootstrap: &[usize],
    config: &ForestConfig,
    rng: ChaCha8Rng,
) -> Result<DecisionTree> {
    if bootstrap.is_empty() {
        return Err(Error::invalid("bootstrap must not be empty"));
    }
    if let Some(&bad) = bootstrap.iter().find(|&&i| i >= data.n_samples()) {
        return Err(Error::invalid(format!(
            "bootstrap index {bad} out of range for {} samples",
            data.n_samples()
        )));
    }
    let max_features = config.resolved_max_features(data.n_features())?;
    let mut grower = Grower {
        data,
        max_features,
        min_samples_split: config.min_samples_split.max(2),
        max_depth: config.max_depth,
        rng,
        nodes: Vec::new(),
        n_leaves: 0,
    };
    let indices: Vec<u32> = bootstrap.iter().map(|&i| i as u32).collect();
    grower.grow(indices, 0);
    Ok(DecisionTree {
        nodes: grower.nodes,
        n_features: data.n_features(),
        n_leaves: grower.n_leaves,
    })
}

struct Grower<'a> {
    data: &'a Dataset,
    max_features: usize,
    min_samples_split: usize,
    max_depth: Option<usize>,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    n_leaves: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Grower<'_> {
    fn grow(&mut self, indices: Vec<u32>, depth: usize) -> usize {
        let counts = self.class_counts(&indices);
        let n = indices.len();
        let at_depth_limit = self.max_depth.is_some_and(|d| depth >= d);
        if n < self.min_samples_split || is_pure(&counts) || at_depth_limit {
            return self.push_leaf(counts);
        }
        match self.best_split(&indices, &counts) {
            Some(split) => {
                let (left_idx, right_idx) = self.partition(&indices, &split);
                let node_idx = self.nodes.len();
                // placeholder, patched after both subtrees exist
                self.nodes.push(Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: 0,
                    right: 0,
                });
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes[node_idx] = Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                };
                node_idx
            }
            None => self.push_leaf(counts),
        }
    }

    fn push_leaf(&mut self, counts: Vec<usize>) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf {
            id: self.n_leaves,
            counts,
        });
        self.n_leaves += 1;
        idx
    }

    fn class_counts(&self, indices: &[u32]) -> Vec<usize> {
        let mut counts = vec![0usize; self.data.n_classes()];
        for &i in indices {
            counts[self.data.label(i as usize)] += 1;
        }
        counts
    }

    /// Scans the sampled candidate features for the split maximizing
    /// `sum_side (sum_j count_j^2) / n_side`, which orders splits exactly
    /// like weighted Gini impurity. Returns `None` when no candidate
    /// strictly improves on the parent.
    fn best_split(&mut self, indices: &[u32], parent_counts: &[usize]) -> Option<BestSplit> {
        let d = self.data.n_features();
        let n = indices.len();
        let parent_score = sum_sq(parent_counts) / n as f64;

        let mut candidates: Vec<usize> =
            rand::seq::index::sample(&mut self.rng, d, self.max_features)
                .into_iter()
                .collect();
        candidates.sort_unstable();

        let mut best: Option<BestSplit> = None;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
        for feature in candidates {
            column.clear();
            for &i in indices {
                let row = self.data.row(i as usize);
                column.push((row[feature], self.data.label(i as usize)));
            }
            column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_counts = vec![0usize; parent_counts.len()];
            let mut left_sq = 0.0f64;
            let total_sq = sum_sq(parent_counts);
            let mut right_sq = total_sq;
            for pos in 0..n - 1 {
                let (value, label) = column[pos];
                // incremental update of sum of squared counts on each side
                let c = left_counts[label] as f64;
                left_sq += 2.0 * c + 1.0;
                let r = (parent_counts[label] - left_counts[label]) as f64;
                right_sq -= 2.0 * r - 1.0;
                left_counts[label] += 1;

                let next = column[pos + 1].0;
                if value == next {
                    continue;
                }
                let n_left = (pos + 1) as f64;
                let n_right = (n - pos - 1) as f64;
                let score = left_sq / n_left + right_sq / n_right;
                if score > parent_score && best.as_ref().map_or(true, |b| score > b.score) {
                    best = Some(BestSplit {
                        feature,
                        threshold: (value + next) / 2.0,
                        score,
                    });
                }
            }
        }
        best
    }

    fn partition(&self, indices: &[u32], split: &BestSplit) -> (Vec<u32>, Vec<u32>) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &i in indices {
            if self.data.row(i as usize)[split.feature] <= split.threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        (left, right)
    }
}

fn is_pure(counts: &[usize]) -> bool {
    counts.iter().filter(|&&c| c > 0).count() <= 1
}

fn sum_sq(counts: &[usize]) -> f64 {
    counts.iter().map(|&c| (c * c) as f64).sum()
}
