//! Benchmark protocol: repeated stratified splits, shared-forest method
//! comparison, rank aggregation, and the sign test.
//!
//! One run draws `repeats` stratified train/test splits of a dataset,
//! trains one ensemble per repeat on the train half, and scores every
//! requested combiner on the test half against those same forests, so
//! method differences come from the voting rules alone. Split and
//! training seeds are both derived from the plan's master seed, making
//! a whole run reproducible from a single number.

mod report;
mod stats;

pub use report::{EvalReport, ExternalColumn, PairwiseSignTest, ReportMeta};
pub use stats::{average_rank, mean, population_std, sign_test, SignTestLevel, SignTestOutcome};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forest::ForestConfig;
use crate::multiview::{train_multiview, MultiViewDataset};
use crate::seed::{self, STREAM_FOREST, STREAM_SPLIT};
use crate::voting::{vote_from_scores, Combiner};

/// Shape of the repeated-split experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub repeats: usize,
    /// Fraction of each class assigned to the train half.
    pub fraction: f64,
    /// Only stratified splitting is implemented; kept explicit so a
    /// plan states what it does.
    pub stratified: bool,
    /// Master seed for the whole run (splits and forests).
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            repeats: 10,
            fraction: 0.5,
            stratified: true,
            seed: 0,
        }
    }
}

impl SplitPlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::invalid("plan needs at least one repeat"));
        }
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction must lie strictly between 0 and 1, got {}",
                self.fraction
            )));
        }
        if !self.stratified {
            return Err(Error::invalid("only stratified splitting is supported"));
        }
        Ok(())
    }
}

/// Splits indices into stratified train/test halves. Each class
/// contributes `round(fraction * count)` rows to train (half rounds to
/// even), clamped so both halves keep at least one row per class.
/// Classes with fewer than two members cannot be split.
pub fn stratified_split(
    labels: &[usize],
    n_classes: usize,
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie strictly between 0 and 1, got {fraction}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &label) in labels.iter().enumerate() {
        if label >= n_classes {
            return Err(Error::invalid(format!(
                "label {label} out of range for {n_classes} classes"
            )));
        }
        by_class[label].push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in by_class.into_iter().enumerate() {
        let n = members.len();
        if n < 2 {
            return Err(Error::invalid(format!(
                "class {class} has {n} sample(s); stratified splitting needs at least 2"
            )));
        }
        let take = ((fraction * n as f64).round_ties_even() as usize).clamp(1, n - 1);
        members.shuffle(rng);
        train.extend_from_slice(&members[..take]);
        test.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Per-repeat accuracies of every method on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub dataset: String,
    pub methods: Vec<Combiner>,
    /// `accuracies[m][r]` = accuracy of method `m` in repeat `r`.
    pub accuracies: Vec<Vec<f64>>,
}

impl ProtocolRun {
    pub fn n_repeats(&self) -> usize {
        self.accuracies.first().map_or(0, Vec::len)
    }

    /// Mean accuracy of method `m` over repeats.
    pub fn mean(&self, m: usize) -> f64 {
        stats::mean(&self.accuracies[m])
    }

    /// Population standard deviation of method `m` over repeats.
    pub fn std(&self, m: usize) -> f64 {
        stats::population_std(&self.accuracies[m])
    }
}

/// Runs the repeated-split protocol for `methods` on `data`.
///
/// Repeat `r` uses a split drawn from `derive(plan.seed, SPLIT, r)` and
/// an ensemble trained under `derive(plan.seed, FOREST, r)`; the seed
/// carried inside `config` is overridden so one master seed governs the
/// run. All methods share each repeat's forests and per-sample view
/// scores.
pub fn run_protocol(
    data: &MultiViewDataset,
    methods: &[Combiner],
    plan: &SplitPlan,
    config: &ForestConfig,
    n_neighbor: usize,
) -> Result<ProtocolRun> {
    plan.validate()?;
    if methods.is_empty() {
        return Err(Error::invalid("protocol needs at least one method"));
    }
    for method in methods {
        method.validate()?;
    }
    if n_neighbor == 0 {
        return Err(Error::invalid("n_neighbor must be at least 1"));
    }
    let needs_local = methods.iter().any(Combiner::needs_local);

    let mut accuracies = vec![Vec::with_capacity(plan.repeats); methods.len()];
    for r in 0..plan.repeats {
        let mut split_rng = seed::stream_rng(plan.seed, STREAM_SPLIT, r as u64);
        let (train_rows, test_rows) = stratified_split(
            data.labels(),
            data.n_classes(),
            plan.fraction,
            &mut split_rng,
        )?;
        let train = data.subset(&train_rows)?;
        let test = data.subset(&test_rows)?;
        let repeat_config =
            config
                .clone()
                .with_seed(seed::derive(plan.seed, STREAM_FOREST, r as u64));
        let ensemble = train_multiview(&train, &repeat_config)?;

        let mut correct = vec![0usize; methods.len()];
        for i in 0..test.n_samples() {
            let scores = ensemble.score_views(&test.sample(i), n_neighbor, needs_local)?;
            for (m, method) in methods.iter().enumerate() {
                let record = vote_from_scores(&scores, *method, test.n_classes())?;
                if record.label == test.labels()[i] {
                    correct[m] += 1;
                }
            }
        }
        for (m, &c) in correct.iter().enumerate() {
            accuracies[m].push(c as f64 / test.n_samples() as f64);
        }
    }
    Ok(ProtocolRun {
        dataset: data.name().to_string(),
        methods: methods.to_vec(),
        accuracies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;

    fn separable_two_view(n: usize) -> MultiViewDataset {
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        let v0: Vec<f64> = labels.iter().map(|&y| y as f64 * 8.0).collect();
        let v1: Vec<f64> = labels.iter().map(|&y| 3.0 - y as f64 * 6.0).collect();
        MultiViewDataset::new(vec![
            Dataset::new(v0, 1, labels.clone(), 2).unwrap(),
            Dataset::new(v1, 1, labels, 2).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn split_halves_even_classes_exactly() {
        let labels = [vec![0; 6], vec![1; 4]].concat();
        let mut rng = seed::stream_rng(1, STREAM_SPLIT, 0);
        let (train, test) = stratified_split(&labels, 2, 0.5, &mut rng).unwrap();
        assert_eq!(train.iter().filter(|&&i| labels[i] == 0).count(), 3);
        assert_eq!(train.iter().filter(|&&i| labels[i] == 1).count(), 2);
        let mut all = [train, test].concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn split_rounds_half_to_even() {
        // 5 * 0.5 = 2.5 rounds to 2; 7 * 0.5 = 3.5 rounds to 4.
        let labels = [vec![0; 5], vec![1; 7]].concat();
        let mut rng = seed::stream_rng(3, STREAM_SPLIT, 0);
        let (train, _) = stratified_split(&labels, 2, 0.5, &mut rng).unwrap();
        assert_eq!(train.iter().filter(|&&i| labels[i] == 0).count(), 2);
        assert_eq!(train.iter().filter(|&&i| labels[i] == 1).count(), 4);
    }

    #[test]
    fn split_keeps_one_sample_per_class_each_side() {
        let labels = vec![0, 0, 1, 1];
        for fraction in [0.01, 0.99] {
            let mut rng = seed::stream_rng(9, STREAM_SPLIT, 0);
            let (train, test) = stratified_split(&labels, 2, fraction, &mut rng).unwrap();
            for side in [&train, &test] {
                assert!(side.iter().any(|&i| labels[i] == 0));
                assert!(side.iter().any(|&i| labels[i] == 1));
            }
        }
    }

    #[test]
    fn singleton_class_is_rejected() {
        let labels = vec![0, 0, 1];
        let mut rng = seed::stream_rng(5, STREAM_SPLIT, 0);
        assert!(stratified_split(&labels, 2, 0.5, &mut rng).is_err());
    }

    #[test]
    fn split_proportions_stay_within_one_sample() {
        let labels = [vec![0usize; 13], vec![1; 9], vec![2; 4]].concat();
        for r in 0..200 {
            let mut rng = seed::stream_rng(11, STREAM_SPLIT, r);
            let (train, _) = stratified_split(&labels, 3, 0.5, &mut rng).unwrap();
            for (class, &count) in [13usize, 9, 4].iter().enumerate() {
                let got = train.iter().filter(|&&i| labels[i] == class).count() as f64;
                assert!((got - 0.5 * count as f64).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn separable_data_scores_one_for_every_method() {
        let data = separable_two_view(12);
        let plan = SplitPlan {
            repeats: 1,
            ..SplitPlan::default()
        };
        let config = ForestConfig::default().with_n_trees(30);
        let methods = Combiner::standard_set();
        let run = run_protocol(&data, &methods, &plan, &config, 3).unwrap();
        for (m, method) in methods.iter().enumerate() {
            assert_eq!(run.mean(m), 1.0, "method {method}");
        }
    }

    #[test]
    fn protocol_is_deterministic() {
        let data = separable_two_view(10);
        let plan = SplitPlan {
            repeats: 3,
            ..SplitPlan::default()
        }
        .with_seed(42);
        let config = ForestConfig::default().with_n_trees(15);
        let methods = vec![Combiner::Majority, Combiner::GlobalLocalDynamic];
        let a = run_protocol(&data, &methods, &plan, &config, 3).unwrap();
        let b = run_protocol(&data, &methods, &plan, &config, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blend_endpoints_match_pure_rules() {
        let data = separable_two_view(14);
        let plan = SplitPlan {
            repeats: 2,
            ..SplitPlan::default()
        }
        .with_seed(7);
        let config = ForestConfig::default().with_n_trees(20);
        let methods = vec![
            Combiner::GlobalDynamic,
            Combiner::LocalDynamic,
            Combiner::GlobalLocalBlend(0.0),
            Combiner::GlobalLocalBlend(1.0),
        ];
        let run = run_protocol(&data, &methods, &plan, &config, 3).unwrap();
        assert_eq!(run.accuracies[0], run.accuracies[2]);
        assert_eq!(run.accuracies[1], run.accuracies[3]);
    }
}
