//! Helpers shared by the oracle suites: hand-rolled tree traversal and
//! small random fixture generators. The traversal here deliberately
//! re-derives routing from the node array instead of calling the
//! library's own accessors.
#![allow(dead_code)]

use mvrf::forest::Node;
use mvrf::Dataset;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Walks `x` through a node array by hand and returns the leaf id.
pub fn route_leaf(nodes: &[Node], x: &[f64]) -> usize {
    let mut idx = 0;
    loop {
        match &nodes[idx] {
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
            Node::Leaf { id, .. } => return *id,
        }
    }
}

/// Class histogram of the leaf `x` routes to.
pub fn route_counts<'a>(nodes: &'a [Node], x: &[f64]) -> &'a [usize] {
    let mut idx = 0;
    loop {
        match &nodes[idx] {
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
            Node::Leaf { counts, .. } => return counts,
        }
    }
}

/// First index holding the maximum value.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Random dataset on a small integer grid; the coarse grid forces
/// duplicate values so split boundaries and ties get exercised.
pub fn grid_dataset(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    n_classes: usize,
    grid: u32,
) -> Dataset {
    let features: Vec<f64> = (0..n * d)
        .map(|_| f64::from(rng.random_range(0..grid)))
        .collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n_classes)).collect();
    Dataset::new(features, d, labels, n_classes).unwrap()
}

/// A bootstrap multiset of `n` draws with replacement.
pub fn bootstrap(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}
