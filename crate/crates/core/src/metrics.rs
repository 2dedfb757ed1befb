//! Agreement and classification metrics, and their conversion to blame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("need at least 2 categories, got {0}")]
    TooFewCategories(usize),
    #[error("confusion matrix must be {k}x{k}")]
    NotSquare { k: usize },
    #[error("confusion matrix is empty")]
    Empty,
    #[error("rating {rating} outside 1..={k}")]
    RatingOutOfRange { rating: usize, k: usize },
    #[error("agreement is undefined: expected weighted disagreement is zero")]
    DegenerateMarginals,
    #[error("binary counts are all zero")]
    EmptyCounts,
}

/// Observed `k x k` contingency table of two ordinal raters
/// (rows = rater A, columns = rater B).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalConfusion {
    k: usize,
    counts: Vec<Vec<u64>>,
}

impl OrdinalConfusion {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self, MetricsError> {
        let k = counts.len();
        if k < 2 {
            return Err(MetricsError::TooFewCategories(k));
        }
        if counts.iter().any(|row| row.len() != k) {
            return Err(MetricsError::NotSquare { k });
        }
        if counts.iter().flatten().all(|&c| c == 0) {
            return Err(MetricsError::Empty);
        }
        Ok(Self { k, counts })
    }

    /// Tabulates rating pairs with categories `1..=k`.
    pub fn from_pairs(pairs: &[(usize, usize)], k: usize) -> Result<Self, MetricsError> {
        if k < 2 {
            return Err(MetricsError::TooFewCategories(k));
        }
        let mut counts = vec![vec![0u64; k]; k];
        for &(a, b) in pairs {
            for r in [a, b] {
                if r < 1 || r > k {
                    return Err(MetricsError::RatingOutOfRange { rating: r, k });
                }
            }
            counts[a - 1][b - 1] += 1;
        }
        Self::new(counts)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Quadratic weighted kappa,
/// `κ = 1 - Σ w_ij O_ij / Σ w_ij E_ij` with `w_ij = (i-j)² / (k-1)²`,
/// `O` the normalized observed table and `E` the outer product of its
/// marginals.
pub fn qwk(m: &OrdinalConfusion) -> Result<f64, MetricsError> {
    let k = m.k;
    let n = m.total() as f64;
    let observed: Vec<Vec<f64>> = m.counts.iter().map(|row| row.iter().map(|&c| c as f64 / n).collect()).collect();
    let rows: Vec<f64> = observed.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..k).map(|j| observed.iter().map(|r| r[j]).sum()).collect();
    let scale = ((k - 1) * (k - 1)) as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..k {
        for j in 0..k {
            let d = i as f64 - j as f64;
            let w = d * d / scale;
            num += w * observed[i][j];
            den += w * rows[i] * cols[j];
        }
    }
    if den == 0.0 {
        return Err(MetricsError::DegenerateMarginals);
    }
    Ok(1.0 - num / den)
}

/// Unclamped `1 - κ`.
pub fn raw_blame_from_agreement(kappa: f64) -> f64 {
    1.0 - kappa
}

/// `clamp(1 - κ, 0, 1)`.
pub fn blame_from_agreement(kappa: f64) -> f64 {
    raw_blame_from_agreement(kappa).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl BinaryCounts {
    /// Tallies predictions against truth for the class `positive`.
    pub fn from_predictions<S: AsRef<str>>(predicted: &[S], truth: &[S], positive: &str) -> Self {
        let mut c = Self::default();
        for (p, t) in predicted.iter().zip(truth) {
            match (p.as_ref() == positive, t.as_ref() == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecallF1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1; any ratio with a zero denominator is 0.
pub fn precision_recall_f1(c: &BinaryCounts) -> Result<PrecisionRecallF1, MetricsError> {
    if c.total() == 0 {
        return Err(MetricsError::EmptyCounts);
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(PrecisionRecallF1 { precision, recall, f1 })
}

/// Performance lost by moving from the human-only system to HITL, clamped
/// to `[0, 1]`.
pub fn blame_from_f1_drop(f1_hitl: f64, f1_human_only: f64) -> f64 {
    (f1_human_only - f1_hitl).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[u64]]) -> OrdinalConfusion {
        OrdinalConfusion::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn perfect_agreement() {
        assert_eq!(qwk(&m(&[&[3, 0], &[0, 4]])).unwrap(), 1.0);
        assert_eq!(qwk(&m(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 9]])).unwrap(), 1.0);
    }

    #[test]
    fn complete_disagreement() {
        assert_eq!(qwk(&m(&[&[0, 5], &[5, 0]])).unwrap(), -1.0);
    }

    #[test]
    fn three_category_example() {
        // N = 11, marginals both (3, 5, 3). With unnormalized weights (i-j)²:
        //   Σ w·count = 4 (four adjacent disagreements)
        //   Σ w·r_i·c_j / N = (4·15 + 4·2·9) / 11 = 132 / 11 = 12
        // κ = 1 - 4/12 = 2/3 (sklearn's cohen_kappa_score agrees)
        let k = qwk(&m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 2]])).unwrap();
        assert!((k - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_marginals() {
        assert_eq!(qwk(&m(&[&[7, 0], &[0, 0]])).unwrap_err(), MetricsError::DegenerateMarginals);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(OrdinalConfusion::new(vec![vec![1]]).unwrap_err(), MetricsError::TooFewCategories(1));
        assert_eq!(OrdinalConfusion::new(vec![vec![1, 2], vec![3]]).unwrap_err(), MetricsError::NotSquare { k: 2 });
        assert_eq!(OrdinalConfusion::new(vec![vec![0, 0], vec![0, 0]]).unwrap_err(), MetricsError::Empty);
        assert_eq!(
            OrdinalConfusion::from_pairs(&[(1, 4)], 3).unwrap_err(),
            MetricsError::RatingOutOfRange { rating: 4, k: 3 }
        );
        let t = OrdinalConfusion::from_pairs(&[(1, 1), (2, 3), (2, 3)], 3).unwrap();
        assert_eq!(t.counts()[1][2], 2);
    }

    #[test]
    fn agreement_blame() {
        assert!((blame_from_agreement(0.478) - 0.522).abs() < 1e-12);
        assert_eq!(blame_from_agreement(1.0), 0.0);
        assert_eq!(blame_from_agreement(-0.5), 1.0);
        assert_eq!(raw_blame_from_agreement(-0.5), 1.5);
    }

    #[test]
    fn prf_cases() {
        let r = precision_recall_f1(&BinaryCounts { tp: 10, fp: 0, fn_: 0, tn: 0 }).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        let r = precision_recall_f1(&BinaryCounts { tp: 2, fp: 1, fn_: 1, tn: 0 }).unwrap();
        for v in [r.precision, r.recall, r.f1] {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
        let r = precision_recall_f1(&BinaryCounts { tp: 0, fp: 5, fn_: 5, tn: 0 }).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        let r = precision_recall_f1(&BinaryCounts { tp: 0, fp: 0, fn_: 0, tn: 4 }).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert!(precision_recall_f1(&BinaryCounts::default()).is_err());
    }

    #[test]
    fn f1_drop() {
        assert!((blame_from_f1_drop(0.831, 0.896) - 0.065).abs() < 1e-12);
        assert_eq!(blame_from_f1_drop(0.8, 0.8), 0.0);
        assert_eq!(blame_from_f1_drop(0.9, 0.8), 0.0);
    }

    #[test]
    fn counts_from_predictions() {
        let c = BinaryCounts::from_predictions(&["1", "1", "0", "0"], &["1", "0", "1", "0"], "1");
        assert_eq!(c, BinaryCounts { tp: 1, fp: 1, fn_: 1, tn: 1 });
    }

    proptest! {
        #[test]
        fn f1_between_precision_and_recall(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50, tn in 0u64..50) {
            let c = BinaryCounts { tp, fp, fn_, tn };
            prop_assume!(c.total() > 0);
            let r = precision_recall_f1(&c).unwrap();
            if r.precision + r.recall > 0.0 {
                let (lo, hi) = (r.precision.min(r.recall), r.precision.max(r.recall));
                prop_assert!(lo - 1e-12 <= r.f1 && r.f1 <= hi + 1e-12);
                prop_assert!(r.f1 <= 2.0 * lo + 1e-12);
            }
        }

        #[test]
        fn blames_in_unit_interval(k in -1.0f64..=1.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assert!((0.0..=1.0).contains(&blame_from_agreement(k)));
            prop_assert!((0.0..=1.0).contains(&blame_from_f1_drop(a, b)));
        }

        #[test]
        fn qwk_in_range(cells in proptest::collection::vec(0u64..20, 9)) {
            let rows: Vec<Vec<u64>> = cells.chunks(3).map(<[u64]>::to_vec).collect();
            if let Ok(t) = OrdinalConfusion::new(rows) {
                if let Ok(k) = qwk(&t) {
                    prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&k));
                }
            }
        }
    }
}
