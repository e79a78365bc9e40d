//! Multi-view datasets and the per-view forest ensemble.
//!
//! A multi-view dataset holds one feature block per view over a shared
//! sample axis and a single label vector. Training fits an independent
//! forest per view; the ensemble keeps its training views, per-view
//! out-of-bag accuracies and predictions, and per-view RFD caches so
//! dynamic voting can score queries without retraining or re-routing
//! the training set.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dissimilarity::{Neighborhood, RfdCache};
use crate::error::{Error, Result};
use crate::forest::{argmax_tie_smallest, train_forest, ForestConfig, RandomForest};
use crate::seed::{self, STREAM_VIEW};
use crate::voting::{self, Combiner, ViewScores, VoteRecord};

/// Aligned feature views over one set of labelled samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiViewDataset {
    views: Vec<Dataset>,
    view_names: Vec<String>,
    class_names: Vec<String>,
    name: String,
}

impl MultiViewDataset {
    /// Wraps per-view datasets, checking they agree on samples, labels,
    /// and class count. Names default to `view0..` and `0..`.
    pub fn new(views: Vec<Dataset>) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::invalid(
                "a multi-view dataset needs at least one view",
            ));
        }
        let first = &views[0];
        for (q, view) in views.iter().enumerate().skip(1) {
            if view.n_samples() != first.n_samples() {
                return Err(Error::dimension(
                    format!("samples in view {q}"),
                    first.n_samples(),
                    view.n_samples(),
                ));
            }
            if view.n_classes() != first.n_classes() {
                return Err(Error::dimension(
                    format!("classes in view {q}"),
                    first.n_classes(),
                    view.n_classes(),
                ));
            }
            if view.labels() != first.labels() {
                return Err(Error::invalid(format!(
                    "view {q} disagrees with view 0 on sample labels"
                )));
            }
        }
        let view_names = (0..views.len()).map(|q| format!("view{q}")).collect();
        let class_names = (0..first.n_classes()).map(|j| j.to_string()).collect();
        Ok(Self {
            views,
            view_names,
            class_names,
            name: "dataset".to_string(),
        })
    }

    /// Replaces the dataset name.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replaces the view names; must match the view count.
    pub fn with_view_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.views.len() {
            return Err(Error::dimension(
                "view names",
                self.views.len(),
                names.len(),
            ));
        }
        self.view_names = names;
        Ok(self)
    }

    /// Replaces the class names; must match the class count.
    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_classes() {
            return Err(Error::dimension(
                "class names",
                self.n_classes(),
                names.len(),
            ));
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].n_samples()
    }

    pub fn n_classes(&self) -> usize {
        self.views[0].n_classes()
    }

    pub fn view(&self, q: usize) -> &Dataset {
        &self.views[q]
    }

    pub fn views(&self) -> &[Dataset] {
        &self.views
    }

    pub fn labels(&self) -> &[usize] {
        self.views[0].labels()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn view_names(&self) -> &[String] {
        &self.view_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// The per-view feature slices of sample `i`.
    pub fn sample(&self, i: usize) -> Vec<&[f64]> {
        self.views.iter().map(|view| view.row(i)).collect()
    }

    /// Row subset across all views, preserving names.
    pub fn subset(&self, rows: &[usize]) -> Result<MultiViewDataset> {
        let views = self
            .views
            .iter()
            .map(|view| view.subset(rows))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            views,
            view_names: self.view_names.clone(),
            class_names: self.class_names.clone(),
            name: self.name.clone(),
        })
    }
}

/// One trained forest per view plus the cached state dynamic voting
/// needs at query time.
#[derive(Debug, Clone)]
pub struct ViewEnsemble {
    forests: Vec<RandomForest>,
    train: MultiViewDataset,
    static_weights: Vec<f64>,
    oob_predictions: Vec<Vec<Option<usize>>>,
    rfd_caches: Vec<RfdCache>,
    config: ForestConfig,
}

/// Trains one forest per view of `data`. View `q` trains under a seed
/// derived from `config.seed` and `q`, so views differ deterministically
/// and per-view results are independent of training order.
pub fn train_multiview(data: &MultiViewDataset, config: &ForestConfig) -> Result<ViewEnsemble> {
    config.validate()?;
    let mut forests = Vec::with_capacity(data.n_views());
    let mut static_weights = Vec::with_capacity(data.n_views());
    let mut oob_predictions = Vec::with_capacity(data.n_views());
    let mut rfd_caches = Vec::with_capacity(data.n_views());
    for (q, view) in data.views().iter().enumerate() {
        let view_config =
            config
                .clone()
                .with_seed(seed::derive(config.seed, STREAM_VIEW, q as u64));
        let forest = train_forest(view, &view_config)?;
        static_weights.push(forest.oob_accuracy(view)?);
        let predictions = (0..view.n_samples())
            .map(|i| forest.oob_subforest_predict(view, i))
            .collect::<Result<Vec<_>>>()?;
        oob_predictions.push(predictions);
        rfd_caches.push(RfdCache::build(&forest, view)?);
        forests.push(forest);
    }
    Ok(ViewEnsemble {
        forests,
        train: data.clone(),
        static_weights,
        oob_predictions,
        rfd_caches,
        config: config.clone(),
    })
}

impl ViewEnsemble {
    pub fn n_views(&self) -> usize {
        self.forests.len()
    }

    pub fn n_classes(&self) -> usize {
        self.train.n_classes()
    }

    pub fn forest(&self, q: usize) -> &RandomForest {
        &self.forests[q]
    }

    pub fn forests(&self) -> &[RandomForest] {
        &self.forests
    }

    pub fn train_data(&self) -> &MultiViewDataset {
        &self.train
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    /// Out-of-bag accuracy of each view's forest on its training view.
    pub fn static_weights(&self) -> &[f64] {
        &self.static_weights
    }

    /// Cached out-of-bag sub-forest prediction for training row `i` in
    /// view `q`; `None` when the row was in-bag for every tree.
    pub fn oob_prediction(&self, q: usize, i: usize) -> Option<usize> {
        self.oob_predictions[q][i]
    }

    pub(crate) fn from_parts(
        forests: Vec<RandomForest>,
        train: MultiViewDataset,
        config: ForestConfig,
    ) -> Result<Self> {
        if forests.len() != train.n_views() {
            return Err(Error::dimension("forests", train.n_views(), forests.len()));
        }
        let mut static_weights = Vec::with_capacity(forests.len());
        let mut oob_predictions = Vec::with_capacity(forests.len());
        let mut rfd_caches = Vec::with_capacity(forests.len());
        for (forest, view) in forests.iter().zip(train.views()) {
            static_weights.push(forest.oob_accuracy(view)?);
            let predictions = (0..view.n_samples())
                .map(|i| forest.oob_subforest_predict(view, i))
                .collect::<Result<Vec<_>>>()?;
            oob_predictions.push(predictions);
            rfd_caches.push(RfdCache::build(forest, view)?);
        }
        Ok(Self {
            forests,
            train,
            static_weights,
            oob_predictions,
            rfd_caches,
            config,
        })
    }

    fn check_sample(&self, sample: &[&[f64]]) -> Result<()> {
        if sample.len() != self.n_views() {
            return Err(Error::dimension(
                "sample views",
                self.n_views(),
                sample.len(),
            ));
        }
        for (q, (block, view)) in sample.iter().zip(self.train.views()).enumerate() {
            if block.len() != view.n_features() {
                return Err(Error::dimension(
                    format!("features of view '{}'", self.train.view_names()[q]),
                    view.n_features(),
                    block.len(),
                ));
            }
        }
        Ok(())
    }

    /// The query's RFD neighborhood within view `q`, tagged with the view.
    pub fn neighborhood(&self, q: usize, x: &[f64], n_neighbor: usize) -> Result<Neighborhood> {
        let mut hood = self.rfd_caches[q].neighborhood(&self.forests[q], x, n_neighbor)?;
        hood.view = Some(q);
        Ok(hood)
    }

    /// Out-of-bag accuracy over `rows` of view `q`, from the cached
    /// per-row predictions; rows with no out-of-bag sub-forest are
    /// skipped, and when all are skipped the view's full out-of-bag
    /// accuracy is used instead.
    pub fn subset_accuracy(&self, q: usize, rows: &[usize]) -> Result<f64> {
        if rows.is_empty() {
            return Err(Error::invalid("subset accuracy needs at least one row"));
        }
        let labels = self.train.labels();
        let mut defined = 0usize;
        let mut correct = 0usize;
        for &i in rows {
            if let Some(pred) = self.oob_predictions[q][i] {
                defined += 1;
                if pred == labels[i] {
                    correct += 1;
                }
            }
        }
        if defined == 0 {
            return Ok(self.static_weights[q]);
        }
        Ok(correct as f64 / defined as f64)
    }

    /// Per-view labels and weights for one query. Local weights are
    /// computed only when `with_locals` is set; they cost one
    /// neighborhood search per view.
    pub fn score_views(
        &self,
        sample: &[&[f64]],
        n_neighbor: usize,
        with_locals: bool,
    ) -> Result<ViewScores> {
        self.check_sample(sample)?;
        let q_total = self.n_views();
        let mut labels = Vec::with_capacity(q_total);
        let mut globals = Vec::with_capacity(q_total);
        let mut locals = with_locals.then(|| Vec::with_capacity(q_total));
        for (q, &view_sample) in sample.iter().enumerate() {
            let proba = self.forests[q].predict_proba(view_sample)?;
            let label = argmax_tie_smallest(&proba);
            labels.push(label);
            globals.push(proba[label]);
            if let Some(locals) = locals.as_mut() {
                let hood = self.neighborhood(q, view_sample, n_neighbor)?;
                locals.push(self.subset_accuracy(q, &hood.indices)?);
            }
        }
        Ok(ViewScores {
            labels,
            globals,
            statics: self.static_weights.clone(),
            locals,
        })
    }

    /// Combined vote for one query under `combiner`.
    pub fn predict(
        &self,
        sample: &[&[f64]],
        combiner: Combiner,
        n_neighbor: usize,
    ) -> Result<VoteRecord> {
        voting::dynamic_vote(self, sample, combiner, n_neighbor)
    }

    /// Accuracy of `combiner` over a labelled multi-view test set.
    pub fn accuracy(
        &self,
        test: &MultiViewDataset,
        combiner: Combiner,
        n_neighbor: usize,
    ) -> Result<f64> {
        if test.n_views() != self.n_views() {
            return Err(Error::dimension(
                "test views",
                self.n_views(),
                test.n_views(),
            ));
        }
        let mut correct = 0usize;
        for i in 0..test.n_samples() {
            let record = self.predict(&test.sample(i), combiner, n_neighbor)?;
            if record.label == test.labels()[i] {
                correct += 1;
            }
        }
        Ok(correct as f64 / test.n_samples() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_view_data() -> MultiViewDataset {
        // View 0 separates the classes on its single feature; view 1 is
        // a shuffled copy of the labels' parity, also separable.
        let n = 16;
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        let v0: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let v1: Vec<f64> = labels.iter().map(|&y| 10.0 - 20.0 * y as f64).collect();
        MultiViewDataset::new(vec![
            Dataset::new(v0, 1, labels.clone(), 2).unwrap(),
            Dataset::new(v1, 1, labels, 2).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn mismatched_view_shapes_are_rejected() {
        let a = Dataset::new(vec![0.0, 1.0, 2.0], 1, vec![0, 0, 1], 2).unwrap();
        let b = Dataset::new(vec![0.0, 1.0], 1, vec![0, 1], 2).unwrap();
        assert!(MultiViewDataset::new(vec![a, b]).is_err());
    }

    #[test]
    fn disagreeing_labels_are_rejected() {
        let a = Dataset::new(vec![0.0, 1.0, 2.0], 1, vec![0, 0, 1], 2).unwrap();
        let b = Dataset::new(vec![0.0, 1.0, 2.0], 1, vec![0, 1, 1], 2).unwrap();
        assert!(MultiViewDataset::new(vec![a, b]).is_err());
    }

    #[test]
    fn subset_keeps_alignment_and_names() {
        let data = two_view_data()
            .with_name("toy")
            .with_view_names(vec!["left".into(), "right".into()])
            .unwrap();
        let sub = data.subset(&[0, 3, 9]).unwrap();
        assert_eq!(sub.n_samples(), 3);
        assert_eq!(sub.labels(), &[0, 0, 1]);
        assert_eq!(sub.view(0).row(1), &[3.0]);
        assert_eq!(sub.name(), "toy");
        assert_eq!(sub.view_names(), &["left".to_string(), "right".to_string()]);
    }

    #[test]
    fn training_fits_one_forest_per_view() {
        let data = two_view_data();
        let config = ForestConfig::default().with_n_trees(30).with_seed(9);
        let ensemble = train_multiview(&data, &config).unwrap();
        assert_eq!(ensemble.n_views(), 2);
        assert_eq!(ensemble.static_weights().len(), 2);
        for &w in ensemble.static_weights() {
            assert!((0.0..=1.0).contains(&w));
        }
        // Separable views should classify their own training data well.
        for i in [0, 4, 11, 15] {
            let record = ensemble
                .predict(&data.sample(i), Combiner::Majority, 3)
                .unwrap();
            assert_eq!(record.label, data.labels()[i]);
        }
    }

    #[test]
    fn view_forests_differ_under_one_master_seed() {
        let data = two_view_data();
        let config = ForestConfig::default().with_n_trees(10).with_seed(4);
        let ensemble = train_multiview(&data, &config).unwrap();
        // Same shapes in both views, so identical per-view seeds would
        // produce identical inbag masks.
        assert_ne!(ensemble.forest(0).inbag(), ensemble.forest(1).inbag());
    }

    #[test]
    fn retraining_is_deterministic() {
        let data = two_view_data();
        let config = ForestConfig::default().with_n_trees(12).with_seed(77);
        let a = train_multiview(&data, &config).unwrap();
        let b = train_multiview(&data, &config).unwrap();
        assert_eq!(a.forests(), b.forests());
        assert_eq!(a.static_weights(), b.static_weights());
    }

    #[test]
    fn wrong_view_width_names_the_view() {
        let data = two_view_data()
            .with_view_names(vec!["spectral".into(), "shape".into()])
            .unwrap();
        let config = ForestConfig::default().with_n_trees(5).with_seed(1);
        let ensemble = train_multiview(&data, &config).unwrap();
        let bad: Vec<&[f64]> = vec![&[1.0], &[1.0, 2.0]];
        let err = ensemble
            .predict(&bad, Combiner::Majority, 3)
            .unwrap_err()
            .to_string();
        assert!(err.contains("shape"), "error should name the view: {err}");
    }

    #[test]
    fn subset_accuracy_matches_forest_computation() {
        let data = two_view_data();
        let config = ForestConfig::default().with_n_trees(40).with_seed(3);
        let ensemble = train_multiview(&data, &config).unwrap();
        let rows = vec![1, 5, 8, 13];
        let direct = ensemble
            .forest(0)
            .oob_accuracy_subset(data.view(0), &rows)
            .unwrap();
        assert_eq!(ensemble.subset_accuracy(0, &rows).unwrap(), direct);
    }

    #[test]
    fn score_views_matches_standalone_weights() {
        let data = two_view_data();
        let config = ForestConfig::default().with_n_trees(40).with_seed(5);
        let ensemble = train_multiview(&data, &config).unwrap();
        let x = data.sample(6);
        let scores = ensemble.score_views(&x, 3, true).unwrap();
        for (q, &view_sample) in x.iter().enumerate() {
            let (label, global) = voting::global_weight(ensemble.forest(q), view_sample).unwrap();
            assert_eq!(scores.labels[q], label);
            assert_eq!(scores.globals[q], global);
            let local =
                voting::local_weight(ensemble.forest(q), data.view(q), view_sample, 3).unwrap();
            assert_eq!(scores.locals.as_ref().unwrap()[q], local);
        }
    }
}
