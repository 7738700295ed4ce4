//! Label encodings: multiclass, multilabel and ranking assignments, plus the
//! ranking-to-presence and ranking-to-membership transforms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PolygridError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Multiclass,
    Multilabel,
    #[serde(rename = "labelranking")]
    LabelRanking,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Multiclass => "multiclass",
            Task::Multilabel => "multilabel",
            Task::LabelRanking => "labelranking",
        })
    }
}

impl FromStr for Task {
    type Err = PolygridError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiclass" => Ok(Task::Multiclass),
            "multilabel" => Ok(Task::Multilabel),
            "labelranking" | "ranking" => Ok(Task::LabelRanking),
            _ => Err(PolygridError::InvalidConfig(format!("unknown task {s:?}"))),
        }
    }
}

/// Ground-truth labels for `m` subjects over `n` labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum Assignment {
    Multiclass {
        n: usize,
        classes: Vec<usize>,
    },
    Multilabel {
        n: usize,
        rows: Vec<Vec<bool>>,
    },
    /// Each row lists label indices from most to least preferred; labels
    /// not listed are absent.
    #[serde(rename = "labelranking")]
    Ranking {
        n: usize,
        rows: Vec<Vec<usize>>,
    },
}

impl Assignment {
    pub fn multiclass(n: usize, classes: Vec<usize>) -> Result<Self> {
        if let Some(i) = classes.iter().position(|&c| c >= n) {
            return Err(PolygridError::InvalidRanking {
                row: i,
                reason: format!("class {} out of range for {n} labels", classes[i]),
            });
        }
        Ok(Assignment::Multiclass { n, classes })
    }

    pub fn multilabel(n: usize, rows: Vec<Vec<bool>>) -> Result<Self> {
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(PolygridError::DimensionMismatch(format!(
                "label row {i} has {} entries, expected {n}",
                rows[i].len()
            )));
        }
        Ok(Assignment::Multilabel { n, rows })
    }

    pub fn ranking(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            check_ranking(i, r, n)?;
        }
        Ok(Assignment::Ranking { n, rows })
    }

    /// Parses rows in the `-1` filler encoding.
    pub fn from_encoded_rankings(n: usize, encoded: &[Vec<i64>]) -> Result<Self> {
        let rows = encoded
            .iter()
            .enumerate()
            .map(|(i, r)| decode_ranking(i, r, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Assignment::Ranking { n, rows })
    }

    pub fn task(&self) -> Task {
        match self {
            Assignment::Multiclass { .. } => Task::Multiclass,
            Assignment::Multilabel { .. } => Task::Multilabel,
            Assignment::Ranking { .. } => Task::LabelRanking,
        }
    }

    pub fn n_labels(&self) -> usize {
        match self {
            Assignment::Multiclass { n, .. }
            | Assignment::Multilabel { n, .. }
            | Assignment::Ranking { n, .. } => *n,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Assignment::Multiclass { classes, .. } => classes.len(),
            Assignment::Multilabel { rows, .. } => rows.len(),
            Assignment::Ranking { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Presence matrix: one-hot for multiclass, downgraded for rankings.
    pub fn presence(&self) -> Vec<Vec<bool>> {
        match self {
            Assignment::Multiclass { n, classes } => classes
                .iter()
                .map(|&c| (0..*n).map(|j| j == c).collect())
                .collect(),
            Assignment::Multilabel { rows, .. } => rows.clone(),
            Assignment::Ranking { n, rows } => rows.iter().map(|r| downgrade_row(r, *n)).collect(),
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Assignment {
        match self {
            Assignment::Multiclass { n, classes } => Assignment::Multiclass {
                n: *n,
                classes: idx.iter().map(|&i| classes[i]).collect(),
            },
            Assignment::Multilabel { n, rows } => Assignment::Multilabel {
                n: *n,
                rows: idx.iter().map(|&i| rows[i].clone()).collect(),
            },
            Assignment::Ranking { n, rows } => Assignment::Ranking {
                n: *n,
                rows: idx.iter().map(|&i| rows[i].clone()).collect(),
            },
        }
    }

    pub fn rankings(&self) -> Option<&[Vec<usize>]> {
        match self {
            Assignment::Ranking { rows, .. } => Some(rows),
            _ => None,
        }
    }
}

/// Predictions for a batch of rows, in a model-agnostic form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelPredictions {
    pub labels: Vec<Vec<bool>>,
    /// Per-label scores; higher means more likely present.
    pub scores: Vec<Vec<f64>>,
    pub rankings: Option<Vec<Vec<usize>>>,
}

fn check_ranking(row: usize, ranking: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &j in ranking {
        if j >= n {
            return Err(PolygridError::InvalidRanking {
                row,
                reason: format!("label {j} out of range for {n} labels"),
            });
        }
        if seen[j] {
            return Err(PolygridError::InvalidRanking {
                row,
                reason: format!("label {j} listed twice"),
            });
        }
        seen[j] = true;
    }
    Ok(())
}

/// Converts one `-1`-filled row into an ordered label list.
pub fn decode_ranking(row: usize, encoded: &[i64], n: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    let mut filler = false;
    for &v in encoded {
        if v == -1 {
            filler = true;
            continue;
        }
        if v < 0 || filler {
            return Err(PolygridError::InvalidRanking {
                row,
                reason: format!("unexpected entry {v} in {encoded:?}"),
            });
        }
        out.push(v as usize);
    }
    check_ranking(row, &out, n)?;
    Ok(out)
}

/// Pads an ordered label list to length `n` with `-1`.
pub fn encode_ranking(ranking: &[usize], n: usize) -> Vec<i64> {
    let mut out: Vec<i64> = ranking.iter().map(|&j| j as i64).collect();
    out.resize(n.max(ranking.len()), -1);
    out
}

fn downgrade_row(ranking: &[usize], n: usize) -> Vec<bool> {
    let mut y = vec![false; n];
    for &j in ranking {
        y[j] = true;
    }
    y
}

/// Presence matrix of a ranking encoding: `y_ij = 1` iff label `j` appears
/// in row `i`.
pub fn downgrade(encoded: &[Vec<i64>], n: usize) -> Result<Vec<Vec<u8>>> {
    encoded
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let ranking = decode_ranking(i, r, n)?;
            Ok(downgrade_row(&ranking, n).into_iter().map(u8::from).collect())
        })
        .collect()
}

/// Membership row for an ordered label list: position `p` gets weight
/// `2^(n-1-p) / (2^n - 1)`, then the row is normalised to sum one.
pub fn membership_row(ranking: &[usize], n: usize) -> Vec<f64> {
    let mut u = vec![0.0; n];
    let denom = 2f64.powi(n as i32) - 1.0;
    for (pos, &j) in ranking.iter().enumerate() {
        u[j] = 2f64.powi((n - 1 - pos) as i32) / denom;
    }
    let total: f64 = u.iter().sum();
    if total > 0.0 {
        u.iter_mut().for_each(|v| *v /= total);
    }
    u
}

/// Row-stochastic membership matrix for a ranking encoding.
pub fn logranks(encoded: &[Vec<i64>], n: usize) -> Result<Vec<Vec<f64>>> {
    encoded
        .iter()
        .enumerate()
        .map(|(i, r)| Ok(membership_row(&decode_ranking(i, r, n)?, n)))
        .collect()
}
