//! Weighted-vote combination of per-view forest predictions.
//!
//! Every combiner produces one nonnegative weight per view and the
//! ensemble label is the class maximizing the weighted sum of view
//! votes. Static weights are fixed at training time (uniform, or each
//! view's out-of-bag accuracy); dynamic weights are recomputed per query
//! from the posterior margin (global), the out-of-bag accuracy over the
//! query's RFD neighborhood (local), or combinations of the two.

use std::fmt;
use std::str::FromStr;

use crate::dataset::Dataset;
use crate::dissimilarity;
use crate::error::{Error, Result};
use crate::forest::{argmax_tie_smallest, RandomForest};
use crate::multiview::ViewEnsemble;

/// Rule assigning one weight per view at vote time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Combiner {
    /// Unit weight per view.
    Majority,
    /// Each view's out-of-bag accuracy, fixed after training.
    StaticWeighted,
    /// The view's top posterior for the query.
    GlobalDynamic,
    /// The view's out-of-bag accuracy over the query's neighborhood.
    LocalDynamic,
    /// Product of the global and local weights.
    GlobalLocalDynamic,
    /// Geometric blend `g^(1-a) * l^a`; `a = 0` recovers the global
    /// weight and `a = 1` the local one.
    GlobalLocalBlend(f64),
}

impl Combiner {
    /// Rejects blend exponents outside `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        if let Combiner::GlobalLocalBlend(a) = self {
            if !(0.0..=1.0).contains(a) {
                return Err(Error::invalid(format!(
                    "blend exponent must lie in [0, 1], got {a}"
                )));
            }
        }
        Ok(())
    }

    /// Whether voting needs neighborhood (local) weights.
    pub fn needs_local(&self) -> bool {
        matches!(
            self,
            Combiner::LocalDynamic | Combiner::GlobalLocalDynamic | Combiner::GlobalLocalBlend(_)
        )
    }

    /// The default benchmark lineup, in report order.
    pub fn standard_set() -> Vec<Combiner> {
        vec![
            Combiner::Majority,
            Combiner::StaticWeighted,
            Combiner::GlobalDynamic,
            Combiner::LocalDynamic,
            Combiner::GlobalLocalDynamic,
        ]
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Combiner::Majority => write!(f, "MVRF"),
            Combiner::StaticWeighted => write!(f, "WRF"),
            Combiner::GlobalDynamic => write!(f, "GDV"),
            Combiner::LocalDynamic => write!(f, "LDV"),
            Combiner::GlobalLocalDynamic => write!(f, "GLDV"),
            Combiner::GlobalLocalBlend(a) => write!(f, "GLnew(a={a})"),
        }
    }
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let combiner = match lower.as_str() {
            "mv" | "mvrf" | "majority" => Combiner::Majority,
            "wrf" | "static" => Combiner::StaticWeighted,
            "gdv" | "global" => Combiner::GlobalDynamic,
            "ldv" | "local" => Combiner::LocalDynamic,
            "gldv" => Combiner::GlobalLocalDynamic,
            _ => match lower.strip_prefix("glnew:").or_else(|| {
                lower
                    .strip_prefix("glnew(a=")
                    .and_then(|rest| rest.strip_suffix(')'))
            }) {
                Some(raw) => {
                    let a: f64 = raw.parse().map_err(|_| {
                        Error::invalid(format!("invalid blend exponent in combiner '{s}'"))
                    })?;
                    let combiner = Combiner::GlobalLocalBlend(a);
                    combiner.validate()?;
                    combiner
                }
                None => {
                    return Err(Error::invalid(format!(
                        "unknown combiner '{s}' (expected mv, wrf, gdv, ldv, gldv, or glnew:<a>)"
                    )))
                }
            },
        };
        Ok(combiner)
    }
}

/// Per-view weights labelled with the rule that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub combiner: Combiner,
    pub weights: Vec<f64>,
}

/// Full audit trail of one combined vote.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteRecord {
    /// Hard label each view proposed.
    pub view_labels: Vec<usize>,
    /// Weights applied to those proposals.
    pub weights: WeightVector,
    /// Weighted vote mass per class.
    pub class_sums: Vec<f64>,
    /// Winning class (smallest index on ties).
    pub label: usize,
    /// True when every weight was zero and the vote fell back to an
    /// unweighted majority.
    pub majority_fallback: bool,
}

/// Everything per-query a combiner can consume, gathered view by view.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewScores {
    /// Hard label per view.
    pub labels: Vec<usize>,
    /// Top posterior per view.
    pub globals: Vec<f64>,
    /// Training-time static weight (out-of-bag accuracy) per view.
    pub statics: Vec<f64>,
    /// Neighborhood accuracy per view; present only when requested.
    pub locals: Option<Vec<f64>>,
}

/// Weighted argmax over view labels. All-zero weight vectors fall back
/// to an unweighted majority and flag the record.
pub fn combine_vote(
    labels: &[usize],
    weights: WeightVector,
    n_classes: usize,
) -> Result<VoteRecord> {
    if labels.is_empty() {
        return Err(Error::invalid("vote needs at least one view"));
    }
    if labels.len() != weights.weights.len() {
        return Err(Error::dimension(
            "vote weights",
            labels.len(),
            weights.weights.len(),
        ));
    }
    for &label in labels {
        if label >= n_classes {
            return Err(Error::invalid(format!(
                "view label {label} out of range for {n_classes} classes"
            )));
        }
    }
    for &w in &weights.weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(format!(
                "vote weights must be finite and nonnegative, got {w}"
            )));
        }
    }

    let majority_fallback = weights.weights.iter().all(|&w| w == 0.0);
    let mut class_sums = vec![0.0; n_classes];
    for (&label, &w) in labels.iter().zip(&weights.weights) {
        class_sums[label] += if majority_fallback { 1.0 } else { w };
    }
    let label = argmax_tie_smallest(&class_sums);
    Ok(VoteRecord {
        view_labels: labels.to_vec(),
        weights,
        class_sums,
        label,
        majority_fallback,
    })
}

/// The trained ensemble's static weight vector.
pub fn static_weights(ensemble: &ViewEnsemble) -> WeightVector {
    WeightVector {
        combiner: Combiner::StaticWeighted,
        weights: ensemble.static_weights().to_vec(),
    }
}

/// One view's hard label and global weight for `x`: the argmax class of
/// the forest posterior and the posterior mass it holds.
pub fn global_weight(forest: &RandomForest, x: &[f64]) -> Result<(usize, f64)> {
    let proba = forest.predict_proba(x)?;
    let label = argmax_tie_smallest(&proba);
    Ok((label, proba[label]))
}

/// One view's local weight for `x`: out-of-bag accuracy over the
/// `n_neighbor` training rows nearest to `x` under RFD.
pub fn local_weight(
    forest: &RandomForest,
    train: &Dataset,
    x: &[f64],
    n_neighbor: usize,
) -> Result<f64> {
    let hood = dissimilarity::neighborhood(forest, train, x, n_neighbor)?;
    forest.oob_accuracy_subset(train, &hood.indices)
}

/// Product combination of global and local weights.
pub fn gl_weight(global: f64, local: f64) -> Result<f64> {
    check_unit("global", global)?;
    check_unit("local", local)?;
    Ok(global * local)
}

/// Geometric blend `global^(1-a) * local^a` with `0^0 = 1`, so the
/// endpoints reproduce the pure global and pure local weights exactly.
pub fn glnew_weight(global: f64, local: f64, a: f64) -> Result<f64> {
    check_unit("global", global)?;
    check_unit("local", local)?;
    Combiner::GlobalLocalBlend(a).validate()?;
    Ok(global.powf(1.0 - a) * local.powf(a))
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invalid(format!(
            "{name} weight must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

/// Builds the weight vector a combiner implies for `scores` and runs the
/// weighted vote.
pub fn vote_from_scores(
    scores: &ViewScores,
    combiner: Combiner,
    n_classes: usize,
) -> Result<VoteRecord> {
    combiner.validate()?;
    let q = scores.labels.len();
    if scores.globals.len() != q || scores.statics.len() != q {
        return Err(Error::dimension("view scores", q, scores.globals.len()));
    }
    let locals = || -> Result<&Vec<f64>> {
        scores
            .locals
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("combiner {combiner} needs local weights")))
    };
    let weights = match combiner {
        Combiner::Majority => vec![1.0; q],
        Combiner::StaticWeighted => scores.statics.clone(),
        Combiner::GlobalDynamic => scores.globals.clone(),
        Combiner::LocalDynamic => locals()?.clone(),
        Combiner::GlobalLocalDynamic => {
            let locals = locals()?;
            scores
                .globals
                .iter()
                .zip(locals)
                .map(|(&g, &l)| gl_weight(g, l))
                .collect::<Result<Vec<f64>>>()?
        }
        Combiner::GlobalLocalBlend(a) => {
            let locals = locals()?;
            scores
                .globals
                .iter()
                .zip(locals)
                .map(|(&g, &l)| glnew_weight(g, l, a))
                .collect::<Result<Vec<f64>>>()?
        }
    };
    combine_vote(
        &scores.labels,
        WeightVector { combiner, weights },
        n_classes,
    )
}

/// Scores every view of `ensemble` for `sample` and combines the votes.
pub fn dynamic_vote(
    ensemble: &ViewEnsemble,
    sample: &[&[f64]],
    combiner: Combiner,
    n_neighbor: usize,
) -> Result<VoteRecord> {
    combiner.validate()?;
    let scores = ensemble.score_views(sample, n_neighbor, combiner.needs_local())?;
    vote_from_scores(&scores, combiner, ensemble.n_classes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(combiner: Combiner, weights: Vec<f64>) -> WeightVector {
        WeightVector { combiner, weights }
    }

    #[test]
    fn unit_weights_count_views() {
        let record =
            combine_vote(&[1, 0, 1, 1], vector(Combiner::Majority, vec![1.0; 4]), 2).unwrap();
        assert_eq!(record.class_sums, vec![1.0, 3.0]);
        assert_eq!(record.label, 1);
        assert!(!record.majority_fallback);
    }

    #[test]
    fn weighted_minority_can_win() {
        // Two views say class 1, but the lone class-0 view outweighs them.
        let record = combine_vote(
            &[0, 1, 1],
            vector(Combiner::GlobalDynamic, vec![0.9, 0.3, 0.4]),
            2,
        )
        .unwrap();
        assert_eq!(record.label, 0);
    }

    #[test]
    fn tied_sums_pick_smaller_class() {
        let record = combine_vote(&[2, 1], vector(Combiner::Majority, vec![1.0, 1.0]), 3).unwrap();
        assert_eq!(record.label, 1);
    }

    #[test]
    fn all_zero_weights_fall_back_to_majority() {
        let record = combine_vote(
            &[1, 1, 0],
            vector(Combiner::LocalDynamic, vec![0.0, 0.0, 0.0]),
            2,
        )
        .unwrap();
        assert!(record.majority_fallback);
        assert_eq!(record.label, 1);
        assert_eq!(record.class_sums, vec![1.0, 2.0]);
    }

    #[test]
    fn negative_and_nonfinite_weights_are_rejected() {
        for bad in [-0.1, f64::NAN, f64::INFINITY] {
            let result = combine_vote(&[0, 1], vector(Combiner::Majority, vec![1.0, bad]), 2);
            assert!(result.is_err());
        }
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let result = combine_vote(&[0, 2], vector(Combiner::Majority, vec![1.0, 1.0]), 2);
        assert!(result.is_err());
    }

    #[test]
    fn blend_weight_hits_exact_endpoints() {
        let (g, l) = (0.37, 0.82);
        assert_eq!(glnew_weight(g, l, 0.0).unwrap(), g);
        assert_eq!(glnew_weight(g, l, 1.0).unwrap(), l);
    }

    #[test]
    fn blend_handles_zero_bases() {
        assert_eq!(glnew_weight(0.0, 0.5, 0.0).unwrap(), 0.0);
        assert_eq!(glnew_weight(0.0, 0.5, 1.0).unwrap(), 0.5);
        assert_eq!(glnew_weight(0.5, 0.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn product_weight_never_exceeds_either_factor() {
        for &(g, l) in &[(0.9, 0.6), (0.2, 0.99), (1.0, 1.0), (0.0, 0.7)] {
            let w = gl_weight(g, l).unwrap();
            assert!(w <= g && w <= l);
        }
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        assert!(gl_weight(1.2, 0.5).is_err());
        assert!(glnew_weight(0.5, -0.1, 0.5).is_err());
        assert!(glnew_weight(0.5, 0.5, 1.5).is_err());
        assert!(Combiner::GlobalLocalBlend(-0.2).validate().is_err());
    }

    #[test]
    fn combiner_names_round_trip() {
        let all = [
            Combiner::Majority,
            Combiner::StaticWeighted,
            Combiner::GlobalDynamic,
            Combiner::LocalDynamic,
            Combiner::GlobalLocalDynamic,
            Combiner::GlobalLocalBlend(0.3),
        ];
        for combiner in all {
            let parsed: Combiner = combiner.to_string().parse().unwrap();
            assert_eq!(parsed, combiner);
        }
        assert_eq!(
            "glnew:0.5".parse::<Combiner>().unwrap(),
            Combiner::GlobalLocalBlend(0.5)
        );
        assert!("banana".parse::<Combiner>().is_err());
        assert!("glnew:2".parse::<Combiner>().is_err());
    }

    #[test]
    fn scores_missing_locals_fail_for_local_rules() {
        let scores = ViewScores {
            labels: vec![0, 1],
            globals: vec![0.8, 0.7],
            statics: vec![0.9, 0.9],
            locals: None,
        };
        assert!(vote_from_scores(&scores, Combiner::GlobalDynamic, 2).is_ok());
        assert!(vote_from_scores(&scores, Combiner::LocalDynamic, 2).is_err());
        assert!(vote_from_scores(&scores, Combiner::GlobalLocalDynamic, 2).is_err());
    }

    #[test]
    fn worked_five_view_example_votes() {
        // Five views, two classes: the product rule flips the decision
        // the pure global and pure local rules agree on.
        let scores = ViewScores {
            labels: vec![0, 1, 0, 1, 1],
            globals: vec![0.75, 0.63, 0.82, 0.66, 0.67],
            statics: vec![0.9, 0.8, 0.85, 0.7, 0.7],
            locals: Some(vec![0.7, 0.5, 0.8, 0.6, 0.6]),
        };
        let mv = vote_from_scores(&scores, Combiner::Majority, 2).unwrap();
        assert_eq!(mv.class_sums, vec![2.0, 3.0]);
        assert_eq!(mv.label, 1);

        let gdv = vote_from_scores(&scores, Combiner::GlobalDynamic, 2).unwrap();
        assert!((gdv.class_sums[0] - 1.57).abs() < 1e-9);
        assert!((gdv.class_sums[1] - 1.96).abs() < 1e-9);
        assert_eq!(gdv.label, 1);

        let ldv = vote_from_scores(&scores, Combiner::LocalDynamic, 2).unwrap();
        assert!((ldv.class_sums[0] - 1.5).abs() < 1e-9);
        assert!((ldv.class_sums[1] - 1.7).abs() < 1e-9);
        assert_eq!(ldv.label, 1);

        let gldv = vote_from_scores(&scores, Combiner::GlobalLocalDynamic, 2).unwrap();
        assert!((gldv.class_sums[0] - 1.181).abs() < 1e-9);
        assert!((gldv.class_sums[1] - 1.113).abs() < 1e-9);
        assert_eq!(gldv.label, 0);
    }
}
