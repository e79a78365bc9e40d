//! Rank and significance statistics over benchmark accuracy tables.

use crate::error::{Error, Result};

/// Mean of a nonempty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divisor n, not n-1).
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// Per-method mean rank over a `[dataset][method]` accuracy table.
///
/// Within each dataset methods are ranked by accuracy descending (rank 1
/// is best); methods with exactly equal accuracy share the average of
/// the ranks they span. The returned vector averages those ranks over
/// datasets, one entry per method column.
pub fn average_rank(table: &[Vec<f64>]) -> Result<Vec<f64>> {
    if table.is_empty() {
        return Err(Error::invalid("rank table needs at least one dataset row"));
    }
    let n_methods = table[0].len();
    if n_methods == 0 {
        return Err(Error::invalid(
            "rank table needs at least one method column",
        ));
    }
    for row in table {
        if row.len() != n_methods {
            return Err(Error::dimension("rank table row", n_methods, row.len()));
        }
    }

    let mut totals = vec![0.0; n_methods];
    for row in table {
        let mut order: Vec<usize> = (0..n_methods).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
        let mut pos = 0;
        while pos < n_methods {
            let mut end = pos + 1;
            while end < n_methods && row[order[end]] == row[order[pos]] {
                end += 1;
            }
            // Ranks are 1-based; tied methods share the mean of the
            // positions they occupy.
            let shared = (pos + 1..=end).sum::<usize>() as f64 / (end - pos) as f64;
            for &m in &order[pos..end] {
                totals[m] += shared;
            }
            pos = end;
        }
    }
    let n_datasets = table.len() as f64;
    Ok(totals.into_iter().map(|t| t / n_datasets).collect())
}

/// One-sided significance level of the sign test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignTestLevel {
    Alpha10,
    Alpha05,
}

impl SignTestLevel {
    /// One-sided normal quantile for the level.
    pub fn z(self) -> f64 {
        match self {
            SignTestLevel::Alpha10 => 1.282,
            SignTestLevel::Alpha05 => 1.645,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SignTestLevel::Alpha10 => "0.10",
            SignTestLevel::Alpha05 => "0.05",
        }
    }
}

/// Outcome of one sign test at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTestOutcome {
    /// Wins plus half the ties.
    pub effective_wins: f64,
    /// Critical count `n/2 + z * sqrt(n)/2`.
    pub critical: f64,
    pub significant: bool,
}

/// Sign test over win/tie/loss counts. Ties contribute half a win, and
/// the result is significant when the effective wins reach the critical
/// count `n/2 + z * sqrt(n)/2` for the one-sided level.
pub fn sign_test(
    wins: usize,
    ties: usize,
    losses: usize,
    level: SignTestLevel,
) -> Result<SignTestOutcome> {
    let n = wins + ties + losses;
    if n == 0 {
        return Err(Error::invalid("sign test needs at least one comparison"));
    }
    let n = n as f64;
    let effective_wins = wins as f64 + ties as f64 / 2.0;
    let critical = n / 2.0 + level.z() * n.sqrt() / 2.0;
    Ok(SignTestOutcome {
        effective_wins,
        critical,
        significant: effective_wins >= critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_method_ranks_first() {
        let table = vec![vec![0.9, 0.5, 0.4], vec![0.8, 0.6, 0.1]];
        let ranks = average_rank(&table).unwrap();
        assert_eq!(ranks, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_way_tie_averages_to_one_point_five() {
        let table = vec![vec![0.7, 0.7]];
        assert_eq!(average_rank(&table).unwrap(), vec![1.5, 1.5]);
    }

    #[test]
    fn four_way_tie_shares_middle_ranks() {
        let table = vec![vec![0.5, 0.7, 0.7, 0.7, 0.7, 0.9]];
        let ranks = average_rank(&table).unwrap();
        assert_eq!(ranks, vec![6.0, 3.5, 3.5, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn ragged_table_is_rejected() {
        let table = vec![vec![0.5, 0.6], vec![0.5]];
        assert!(average_rank(&table).is_err());
    }

    #[test]
    fn published_benchmark_ranks_reproduce() {
        let table = vec![
            vec![0.7628, 0.8279, 0.8279, 0.8279, 0.7698, 0.7744],
            vec![0.7323, 0.7676, 0.7676, 0.7676, 0.7411, 0.7441],
            vec![0.6255, 0.6441, 0.6441, 0.6441, 0.6441, 0.6605],
            vec![0.6236, 0.6131, 0.6131, 0.6157, 0.6263, 0.6289],
        ];
        let ranks = average_rank(&table).unwrap();
        assert_eq!(ranks, vec![5.250, 3.250, 3.250, 2.875, 3.875, 2.500]);
    }

    #[test]
    fn four_straight_wins_clear_both_levels() {
        let strict = sign_test(4, 0, 0, SignTestLevel::Alpha05).unwrap();
        assert!((strict.critical - 3.645).abs() < 1e-12);
        assert!(strict.significant);
        let loose = sign_test(4, 0, 0, SignTestLevel::Alpha10).unwrap();
        assert!((loose.critical - 3.282).abs() < 1e-12);
        assert!(loose.significant);
    }

    #[test]
    fn three_of_four_wins_clear_neither_level() {
        for level in [SignTestLevel::Alpha10, SignTestLevel::Alpha05] {
            let outcome = sign_test(3, 0, 1, level).unwrap();
            assert_eq!(outcome.effective_wins, 3.0);
            assert!(!outcome.significant);
        }
    }

    #[test]
    fn ties_count_half() {
        let outcome = sign_test(3, 2, 0, SignTestLevel::Alpha05).unwrap();
        assert_eq!(outcome.effective_wins, 4.0);
    }

    #[test]
    fn balanced_records_are_never_significant() {
        for w in 1..20 {
            for ties in 0..3 {
                let outcome = sign_test(w, ties, w, SignTestLevel::Alpha10).unwrap();
                assert!(!outcome.significant, "wins={w} ties={ties}");
            }
        }
    }

    #[test]
    fn empty_record_is_rejected() {
        assert!(sign_test(0, 0, 0, SignTestLevel::Alpha05).is_err());
    }
}
