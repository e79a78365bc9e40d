//! Report assembly: per-repeat CSV, Markdown accuracy summary with an
//! average-rank row, and the pairwise sign-test block.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::evaluation::stats::{self, SignTestLevel, SignTestOutcome};
use crate::evaluation::ProtocolRun;
use crate::voting::Combiner;

/// Run parameters echoed into every report so published tables are
/// reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportMeta {
    pub n_trees: usize,
    pub n_neighbor: usize,
    pub repeats: usize,
    pub fraction: f64,
    pub seed: u64,
}

/// Externally produced accuracy column (one mean/std pair per dataset),
/// shown before the computed methods.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalColumn {
    pub name: String,
    /// `(dataset, mean, std)` with accuracies as fractions in [0, 1].
    pub results: Vec<(String, f64, f64)>,
}

impl ExternalColumn {
    fn get(&self, dataset: &str) -> Option<(f64, f64)> {
        self.results
            .iter()
            .find(|(name, _, _)| name == dataset)
            .map(|&(_, mean, std)| (mean, std))
    }
}

/// Sign test of one column against another, wins counted for `left`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSignTest {
    pub left: String,
    pub right: String,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    pub alpha10: SignTestOutcome,
    pub alpha05: SignTestOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelStyle {
    /// Combiner names (MVRF, WRF, ...).
    MethodNames,
    /// Blend-grid names (`a=0 (GDV)` ... `a=1 (LDV)`).
    SweepGrid,
}

/// Protocol results over one or more datasets, ready to render.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    meta: ReportMeta,
    runs: Vec<ProtocolRun>,
    external: Option<ExternalColumn>,
    label_style: LabelStyle,
}

impl EvalReport {
    /// Standard method-comparison report.
    pub fn new(
        meta: ReportMeta,
        runs: Vec<ProtocolRun>,
        external: Option<ExternalColumn>,
    ) -> Result<Self> {
        Self::build(meta, runs, external, LabelStyle::MethodNames)
    }

    /// Blend-sweep report; columns are labelled by exponent.
    pub fn sweep(meta: ReportMeta, runs: Vec<ProtocolRun>) -> Result<Self> {
        Self::build(meta, runs, None, LabelStyle::SweepGrid)
    }

    fn build(
        meta: ReportMeta,
        runs: Vec<ProtocolRun>,
        external: Option<ExternalColumn>,
        label_style: LabelStyle,
    ) -> Result<Self> {
        let first = runs
            .first()
            .ok_or_else(|| Error::invalid("report needs at least one protocol run"))?;
        for run in &runs {
            if run.methods != first.methods {
                return Err(Error::invalid(
                    "all protocol runs in one report must score the same methods",
                ));
            }
        }
        if let Some(external) = &external {
            for run in &runs {
                if external.get(&run.dataset).is_none() {
                    return Err(Error::invalid(format!(
                        "external column '{}' has no entry for dataset '{}'",
                        external.name, run.dataset
                    )));
                }
            }
        }
        Ok(Self {
            meta,
            runs,
            external,
            label_style,
        })
    }

    pub fn runs(&self) -> &[ProtocolRun] {
        &self.runs
    }

    fn method_label(&self, method: &Combiner) -> String {
        match (self.label_style, method) {
            (LabelStyle::SweepGrid, Combiner::GlobalLocalBlend(a)) => {
                if *a == 0.0 {
                    "a=0 (GDV)".to_string()
                } else if *a == 1.0 {
                    "a=1 (LDV)".to_string()
                } else {
                    format!("a={a}")
                }
            }
            _ => method.to_string(),
        }
    }

    /// Column headers: the external column first when present, then one
    /// per method.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if let Some(external) = &self.external {
            names.push(external.name.clone());
        }
        names.extend(self.runs[0].methods.iter().map(|m| self.method_label(m)));
        names
    }

    /// Mean-accuracy table, `[dataset][column]`, columns as in
    /// [`column_names`](Self::column_names).
    pub fn accuracy_table(&self) -> Vec<Vec<f64>> {
        self.runs
            .iter()
            .map(|run| {
                let mut row = Vec::new();
                if let Some(external) = &self.external {
                    row.push(external.get(&run.dataset).expect("checked at build").0);
                }
                row.extend((0..run.methods.len()).map(|m| run.mean(m)));
                row
            })
            .collect()
    }

    /// Average rank per column over datasets.
    pub fn average_ranks(&self) -> Result<Vec<f64>> {
        stats::average_rank(&self.accuracy_table())
    }

    /// All column pairs tested for sign-test significance, wins counted
    /// for the later column against the earlier one (so each method is
    /// compared against the external baseline when one is present).
    pub fn sign_tests(&self) -> Result<Vec<PairwiseSignTest>> {
        let names = self.column_names();
        let table = self.accuracy_table();
        let mut pairs = Vec::new();
        for base in 0..names.len() {
            for challenger in base + 1..names.len() {
                let mut wins = 0;
                let mut ties = 0;
                let mut losses = 0;
                for row in &table {
                    if row[challenger] > row[base] {
                        wins += 1;
                    } else if row[challenger] == row[base] {
                        ties += 1;
                    } else {
                        losses += 1;
                    }
                }
                pairs.push(PairwiseSignTest {
                    left: names[challenger].clone(),
                    right: names[base].clone(),
                    wins,
                    ties,
                    losses,
                    alpha10: stats::sign_test(wins, ties, losses, SignTestLevel::Alpha10)?,
                    alpha05: stats::sign_test(wins, ties, losses, SignTestLevel::Alpha05)?,
                });
            }
        }
        Ok(pairs)
    }

    /// One row per dataset, method, and repeat; accuracies printed with
    /// round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,method,repeat,accuracy\n");
        for run in &self.runs {
            for (m, method) in run.methods.iter().enumerate() {
                for (r, acc) in run.accuracies[m].iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        run.dataset,
                        self.method_label(method),
                        r,
                        acc
                    );
                }
            }
        }
        out
    }

    /// Markdown summary: parameter header, accuracy table with an
    /// average-rank row, and the sign-test block.
    pub fn to_markdown(&self) -> Result<String> {
        let names = self.column_names();
        let mut out = String::from("# Benchmark report\n\n");
        let _ = writeln!(out, "- seed: {}", self.meta.seed);
        let _ = writeln!(out, "- trees per forest: {}", self.meta.n_trees);
        let _ = writeln!(out, "- neighborhood size: {}", self.meta.n_neighbor);
        let _ = writeln!(out, "- repeats: {}", self.meta.repeats);
        let _ = writeln!(out, "- train fraction: {}", self.meta.fraction);
        out.push_str("- spread: population standard deviation over repeats\n\n");

        out.push_str("## Accuracy (mean% \u{b1} std)\n\n");
        let _ = writeln!(out, "| Dataset | {} |", names.join(" | "));
        let _ = writeln!(out, "|{}", " --- |".repeat(names.len() + 1));
        for run in &self.runs {
            let mut cells = Vec::new();
            if let Some(external) = &self.external {
                let (mean, std) = external.get(&run.dataset).expect("checked at build");
                cells.push(format_cell(mean, std));
            }
            for m in 0..run.methods.len() {
                cells.push(format_cell(run.mean(m), run.std(m)));
            }
            let _ = writeln!(out, "| {} | {} |", run.dataset, cells.join(" | "));
        }
        let ranks = self.average_ranks()?;
        let rank_cells: Vec<String> = ranks.iter().map(|r| format!("{r:.3}")).collect();
        let _ = writeln!(out, "| Average rank | {} |", rank_cells.join(" | "));

        let _ = writeln!(
            out,
            "\n## Sign test (wins/ties/losses over {} dataset(s))\n",
            self.runs.len()
        );
        let pairs = self.sign_tests()?;
        if pairs.is_empty() {
            out.push_str("- single column; nothing to compare\n");
        }
        for pair in &pairs {
            let _ = writeln!(
                out,
                "- {} vs {}: {}/{}/{} \u{2192} {} at \u{3b1}=0.10 (effective wins {:.3}, critical {:.3}), {} at \u{3b1}=0.05 (critical {:.3})",
                pair.left,
                pair.right,
                pair.wins,
                pair.ties,
                pair.losses,
                verdict(&pair.alpha10),
                pair.alpha10.effective_wins,
                pair.alpha10.critical,
                verdict(&pair.alpha05),
                pair.alpha05.critical,
            );
        }
        Ok(out)
    }
}

fn format_cell(mean: f64, std: f64) -> String {
    format!("{:.2}% \u{b1}{:.2}", mean * 100.0, std * 100.0)
}

fn verdict(outcome: &SignTestOutcome) -> &'static str {
    if outcome.significant {
        "significant"
    } else {
        "not significant"
    }
}
