//! Multi-view random forest ensembles with static and dynamic weighted voting.
//!
//! One random forest is trained per feature view over the same samples;
//! per-view predictions are then fused by weighted majority voting.
//! Besides plain majority voting, weights can be static (per-view
//! out-of-bag accuracy) or dynamic per test sample: the forest's
//! confidence in its predicted class (global), the out-of-bag accuracy
//! over the test sample's nearest training neighbors under the random
//! forest dissimilarity (local), or blends of the two.
//!
//! The crate also ships the benchmark harness used to compare the
//! combiners: stratified repeated random splits, accuracy tables with
//! average ranks, and a pairwise sign test.

pub mod dataset;
pub mod dissimilarity;
pub mod error;
pub mod evaluation;
pub mod forest;
pub mod io;
pub mod multiview;
pub mod seed;
pub mod voting;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use forest::{train_forest, DecisionTree, ForestConfig, RandomForest};
pub use multiview::{train_multiview, MultiViewDataset, ViewEnsemble};
pub use voting::{Combiner, VoteRecord};
