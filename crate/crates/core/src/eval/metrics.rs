use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PolygridError, Result};
use crate::labels::{encode_ranking, Assignment, LabelPredictions, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "accuracy")]
    Accuracy,
    #[serde(rename = "hammingl")]
    HammingLoss,
    #[serde(rename = "f1.micro")]
    F1Micro,
    #[serde(rename = "f1.macro")]
    F1Macro,
    #[serde(rename = "f1.weigh")]
    F1Weighted,
    #[serde(rename = "jaccsim")]
    JaccSim,
    #[serde(rename = "ktau")]
    KendallTau,
    #[serde(rename = "lracc")]
    LrAccuracy,
    #[serde(rename = "lrloss")]
    LrLoss,
}

impl MetricKind {
    pub const ALL: [MetricKind; 9] = [
        MetricKind::Accuracy,
        MetricKind::HammingLoss,
        MetricKind::F1Micro,
        MetricKind::F1Macro,
        MetricKind::F1Weighted,
        MetricKind::JaccSim,
        MetricKind::KendallTau,
        MetricKind::LrAccuracy,
        MetricKind::LrLoss,
    ];

    pub const CLASSIFICATION: [MetricKind; 6] = [
        MetricKind::Accuracy,
        MetricKind::HammingLoss,
        MetricKind::F1Micro,
        MetricKind::F1Macro,
        MetricKind::F1Weighted,
        MetricKind::JaccSim,
    ];

    pub const RANKING: [MetricKind; 3] = [MetricKind::KendallTau, MetricKind::LrAccuracy, MetricKind::LrLoss];

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::HammingLoss => "hammingl",
            MetricKind::F1Micro => "f1.micro",
            MetricKind::F1Macro => "f1.macro",
            MetricKind::F1Weighted => "f1.weigh",
            MetricKind::JaccSim => "jaccsim",
            MetricKind::KendallTau => "ktau",
            MetricKind::LrAccuracy => "lracc",
            MetricKind::LrLoss => "lrloss",
        }
    }

    pub fn higher_is_better(&self) -> bool {
        !matches!(self, MetricKind::HammingLoss | MetricKind::JaccSim | MetricKind::LrLoss)
    }

    /// `a` is strictly better than `b`.
    pub fn better(&self, a: f64, b: f64) -> bool {
        if self.higher_is_better() {
            a > b
        } else {
            a < b
        }
    }

    pub fn is_ranking(&self) -> bool {
        MetricKind::RANKING.contains(self)
    }

    /// Metrics reported for a task by default.
    pub fn for_task(task: Task) -> Vec<MetricKind> {
        match task {
            Task::LabelRanking => MetricKind::RANKING.to_vec(),
            _ => MetricKind::CLASSIFICATION.to_vec(),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = PolygridError;
    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| PolygridError::InvalidConfig(format!("unknown metric {s:?}")))
    }
}

fn check_shapes(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(PolygridError::DimensionMismatch(format!(
            "{} truth rows but {} predicted rows",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(PolygridError::Empty("no rows to score".into()));
    }
    if let Some(i) = (0..truth.len()).find(|&i| truth[i].len() != pred[i].len()) {
        return Err(PolygridError::DimensionMismatch(format!(
            "row {i}: {} truth labels but {} predicted",
            truth[i].len(),
            pred[i].len()
        )));
    }
    Ok(())
}

pub fn subset_accuracy(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<f64> {
    check_shapes(truth, pred)?;
    Ok(truth.iter().zip(pred).filter(|(t, p)| t == p).count() as f64 / truth.len() as f64)
}

pub fn hamming_loss(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<f64> {
    check_shapes(truth, pred)?;
    let cells: usize = truth.iter().map(Vec::len).sum();
    let wrong = truth
        .iter()
        .zip(pred)
        .flat_map(|(t, p)| t.iter().zip(p))
        .filter(|(a, b)| a != b)
        .count();
    Ok(wrong as f64 / cells as f64)
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Counts {
    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

fn label_counts(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Vec<Counts> {
    let n = truth[0].len();
    let mut c = vec![Counts::default(); n];
    for (t, p) in truth.iter().zip(pred) {
        for j in 0..n {
            match (t[j], p[j]) {
                (true, true) => c[j].tp += 1,
                (false, true) => c[j].fp += 1,
                (true, false) => c[j].fn_ += 1,
                (false, false) => {}
            }
        }
    }
    c
}

pub fn f1_micro(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<f64> {
    check_shapes(truth, pred)?;
    let total = label_counts(truth, pred).iter().fold(Counts::default(), |a, c| Counts {
        tp: a.tp + c.tp,
        fp: a.fp + c.fp,
        fn_: a.fn_ + c.fn_,
    });
    Ok(total.f1())
}

/// Unweighted mean of per-label F1; a label with no true or predicted
/// positives scores 1.
pub fn f1_macro(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<f64> {
    check_shapes(truth, pred)?;
    let c = label_counts(truth, pred);
    Ok(c.iter().map(Counts::f1).sum::<f64>() / c.len() as f64)
}

/// Per-label F1 weighted by label support; falls back to the macro mean
/// when no label has support.
pub fn f1_weighted(truth: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<f64> {
    check_shapes(truth, pred)?;
    let c = label_counts(truth, pred);
    let support: usize = c.iter().map(|c| c.tp + c.fn_).sum();
    if support == 0 {
        return f1_macro(truth, pred);
    }
    Ok(c.iter().map(|c| (c.tp + c.fn_) as f64 * c.f1()).sum::<f64>() / support as f64)
}

/// Smallest closed interval containing every value, if any.
fn hull(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Jaccard index of two closed intervals by length; two coinciding
/// points count as full overlap.
pub fn interval_jaccard(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union > 0.0 {
        inter / union
    } else if a.0.max(b.0) <= a.1.min(b.1) {
        1.0
    } else {
        0.0
    }
}

/// Per label, overlap of the score hulls of true negatives and true
/// positives, averaged over labels. A label missing either class adds 0.
pub fn jaccsim(truth: &[Vec<bool>], scores: &[Vec<f64>]) -> Result<f64> {
    if truth.len() != scores.len() || truth.is_empty() {
        return Err(PolygridError::DimensionMismatch(format!(
            "{} truth rows but {} score rows",
            truth.len(),
            scores.len()
        )));
    }
    let n = truth[0].len();
    if let Some(i) = scores.iter().position(|s| s.len() != n) {
        return Err(PolygridError::DimensionMismatch(format!("score row {i} has wrong length")));
    }
    let total: f64 = (0..n)
        .map(|j| {
            let neg = hull(truth.iter().zip(scores).filter(|(t, _)| !t[j]).map(|(_, s)| s[j]));
            let pos = hull(truth.iter().zip(scores).filter(|(t, _)| t[j]).map(|(_, s)| s[j]));
            match (neg, pos) {
                (Some(a), Some(b)) => interval_jaccard(a, b),
                _ => 0.0,
            }
        })
        .sum();
    Ok(total / n as f64)
}

/// Kendall tau over the pairs ordered by the true ranking. A pair is
/// concordant when both labels are predicted in the same order and
/// discordant otherwise, including when either label is missing from the
/// prediction. A single-label truth scores 1 if the label is predicted and
/// -1 if not; an empty truth scores 1 only against an empty prediction.
pub fn kendall_tau_row(truth: &[usize], pred: &[usize]) -> f64 {
    let pos = |j: usize| pred.iter().position(|&p| p == j);
    match truth.len() {
        0 => {
            if pred.is_empty() {
                1.0
            } else {
                -1.0
            }
        }
        1 => {
            if pos(truth[0]).is_some() {
                1.0
            } else {
                -1.0
            }
        }
        k => {
            let mut concordant = 0i64;
            for a in 0..k {
                for b in a + 1..k {
                    if let (Some(pa), Some(pb)) = (pos(truth[a]), pos(truth[b])) {
                        if pa < pb {
                            concordant += 1;
                        }
                    }
                }
            }
            let pairs = (k * (k - 1) / 2) as i64;
            (2 * concordant - pairs) as f64 / pairs as f64
        }
    }
}

fn check_rankings(truth: &[Vec<usize>], pred: &[Vec<usize>]) -> Result<()> {
    if truth.len() != pred.len() || truth.is_empty() {
        return Err(PolygridError::DimensionMismatch(format!(
            "{} true rankings but {} predicted",
            truth.len(),
            pred.len()
        )));
    }
    Ok(())
}

pub fn kendall_tau(truth: &[Vec<usize>], pred: &[Vec<usize>]) -> Result<f64> {
    check_rankings(truth, pred)?;
    Ok(truth.iter().zip(pred).map(|(t, p)| kendall_tau_row(t, p)).sum::<f64>() / truth.len() as f64)
}

pub fn lr_accuracy(truth: &[Vec<usize>], pred: &[Vec<usize>]) -> Result<f64> {
    check_rankings(truth, pred)?;
    Ok(truth.iter().zip(pred).filter(|(t, p)| t == p).count() as f64 / truth.len() as f64)
}

/// Fraction of `-1`-padded encoding cells that differ.
pub fn lr_loss(truth: &[Vec<usize>], pred: &[Vec<usize>], n: usize) -> Result<f64> {
    check_rankings(truth, pred)?;
    let wrong: usize = truth
        .iter()
        .zip(pred)
        .map(|(t, p)| {
            encode_ranking(t, n)
                .iter()
                .zip(encode_ranking(p, n))
                .filter(|(a, b)| **a != *b)
                .count()
        })
        .sum();
    Ok(wrong as f64 / (truth.len() * n) as f64)
}

/// Scores one metric. Classification metrics read label presence (rankings
/// are downgraded); ranking metrics need ranking truth and predictions.
pub fn metric(kind: MetricKind, truth: &Assignment, pred: &LabelPredictions) -> Result<f64> {
    if kind.is_ranking() {
        let t = truth
            .rankings()
            .ok_or_else(|| PolygridError::InvalidConfig(format!("{kind} needs ranking ground truth")))?;
        let p = pred
            .rankings
            .as_deref()
            .ok_or_else(|| PolygridError::InvalidConfig(format!("{kind} needs predicted rankings")))?;
        return match kind {
            MetricKind::KendallTau => kendall_tau(t, p),
            MetricKind::LrAccuracy => lr_accuracy(t, p),
            _ => lr_loss(t, p, truth.n_labels()),
        };
    }
    let t = truth.presence();
    match kind {
        MetricKind::Accuracy => subset_accuracy(&t, &pred.labels),
        MetricKind::HammingLoss => hamming_loss(&t, &pred.labels),
        MetricKind::F1Micro => f1_micro(&t, &pred.labels),
        MetricKind::F1Macro => f1_macro(&t, &pred.labels),
        MetricKind::F1Weighted => f1_weighted(&t, &pred.labels),
        _ => jaccsim(&t, &pred.scores),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(rows: &[&[u8]]) -> Vec<Vec<bool>> {
        rows.iter().map(|r| r.iter().map(|&v| v == 1).collect()).collect()
    }

    #[test]
    fn perfect_predictions() {
        let y = b(&[&[1, 0, 1], &[0, 1, 0], &[0, 0, 0]]);
        assert_eq!(subset_accuracy(&y, &y).unwrap(), 1.0);
        assert_eq!(hamming_loss(&y, &y).unwrap(), 0.0);
        assert_eq!(f1_micro(&y, &y).unwrap(), 1.0);
        assert_eq!(f1_macro(&y, &y).unwrap(), 1.0);
        assert_eq!(f1_weighted(&y, &y).unwrap(), 1.0);
    }

    #[test]
    fn f1_by_hand() {
        let t = b(&[&[1, 0], &[1, 1], &[0, 1]]);
        let p = b(&[&[1, 1], &[0, 1], &[0, 1]]);
        // label 0: tp 1 fn 1 -> 2/3; label 1: tp 2 fp 1 -> 4/5
        assert!((f1_macro(&t, &p).unwrap() - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-12);
        assert!((f1_micro(&t, &p).unwrap() - 6.0 / 8.0).abs() < 1e-12);
        assert!((f1_weighted(&t, &p).unwrap() - (2.0 * 2.0 / 3.0 + 2.0 * 0.8) / 4.0).abs() < 1e-12);
        assert!((hamming_loss(&t, &p).unwrap() - 2.0 / 6.0).abs() < 1e-12);
        assert!((subset_accuracy(&t, &p).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_hulls_have_zero_overlap() {
        let t = b(&[&[0], &[0], &[1], &[1]]);
        let s = vec![vec![0.0], vec![0.4], vec![0.6], vec![1.0]];
        assert_eq!(jaccsim(&t, &s).unwrap(), 0.0);
        let s = vec![vec![0.0], vec![1.0], vec![0.0], vec![1.0]];
        assert_eq!(jaccsim(&t, &s).unwrap(), 1.0);
        let t = b(&[&[1], &[1]]);
        assert_eq!(jaccsim(&t, &s[..2]).unwrap(), 0.0);
    }

    #[test]
    fn tau_extremes() {
        assert_eq!(kendall_tau_row(&[0, 1, 2, 3], &[0, 1, 2, 3]), 1.0);
        assert_eq!(kendall_tau_row(&[0, 1, 2, 3], &[3, 2, 1, 0]), -1.0);
        assert_eq!(kendall_tau_row(&[0, 1], &[0]), -1.0);
        assert_eq!(kendall_tau_row(&[2], &[1, 2]), 1.0);
        assert!((kendall_tau_row(&[0, 1, 2], &[1, 0, 2]) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ranking_cells() {
        let t = vec![vec![1, 2]];
        let p = vec![vec![1, 3]];
        assert_eq!(lr_loss(&t, &p, 4).unwrap(), 0.25);
        assert_eq!(lr_accuracy(&t, &p).unwrap(), 0.0);
        assert_eq!(lr_accuracy(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn names_round_trip() {
        for m in MetricKind::ALL {
            assert_eq!(m.name().parse::<MetricKind>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }
}
