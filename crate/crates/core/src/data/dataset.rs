use serde::{Deserialize, Serialize};

use crate::error::{PolygridError, Result};
use crate::labels::Assignment;

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// How raw scores were turned into unit-scaled ones.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    /// Column maxima of the raw scores; `x = raw / maxima`.
    pub maxima: Vec<f64>,
    /// Value substituted for scaled scores that were exactly zero.
    pub epsilon: f64,
    /// `(row, column)` of every substituted cell.
    pub shifted: Vec<(usize, usize)>,
    /// Free-form record of how the data was synthesised, if it was.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub synthesis: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub domain_names: Vec<String>,
    pub label_names: Vec<String>,
    pub raw: Vec<Vec<f64>>,
    /// Unit-scaled scores in `(0, 1]`.
    pub x: Vec<Vec<f64>>,
    pub y: Option<Assignment>,
    /// Native `[lo, hi]` range of each domain, when known.
    pub ranges: Option<Vec<(f64, f64)>>,
    pub manifest: Manifest,
}

/// Scales each column by its maximum and replaces exact zeros by
/// `epsilon`. Negative or non-finite scores are rejected.
pub fn prepare(raw: &[Vec<f64>], epsilon: f64) -> Result<(Vec<Vec<f64>>, Manifest)> {
    let d = raw
        .first()
        .map(Vec::len)
        .ok_or_else(|| PolygridError::Empty("no assessments".into()))?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PolygridError::InvalidConfig(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let mut maxima = vec![0.0f64; d];
    for (i, row) in raw.iter().enumerate() {
        if row.len() != d {
            return Err(PolygridError::DimensionMismatch(format!(
                "row {i} has {} scores, expected {d}",
                row.len()
            )));
        }
        for (k, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(PolygridError::NonFinite { row: i, col: k });
            }
            if v < 0.0 {
                return Err(PolygridError::ScoreOutOfRange {
                    row: i,
                    col: k,
                    value: v,
                });
            }
            maxima[k] = maxima[k].max(v);
        }
    }
    if let Some(k) = maxima.iter().position(|&m| m <= 0.0) {
        return Err(PolygridError::InvalidConfig(format!(
            "domain column {k} is all zero and cannot be scaled"
        )));
    }
    let mut shifted = Vec::new();
    let x = raw
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(k, &v)| {
                    let s = v / maxima[k];
                    if s == 0.0 {
                        shifted.push((i, k));
                        epsilon
                    } else {
                        s
                    }
                })
                .collect()
        })
        .collect();
    Ok((
        x,
        Manifest {
            maxima,
            epsilon,
            shifted,
            synthesis: None,
        },
    ))
}

impl Dataset {
    pub fn from_raw(name: &str, domain_names: Vec<String>, raw: Vec<Vec<f64>>) -> Result<Self> {
        let (x, manifest) = prepare(&raw, DEFAULT_EPSILON)?;
        if domain_names.len() != manifest.maxima.len() {
            return Err(PolygridError::DimensionMismatch(format!(
                "{} domain names for {} columns",
                domain_names.len(),
                manifest.maxima.len()
            )));
        }
        Ok(Dataset {
            name: name.to_string(),
            domain_names,
            label_names: Vec::new(),
            raw,
            x,
            y: None,
            ranges: None,
            manifest,
        })
    }

    pub fn with_assignment(mut self, y: Assignment, label_names: Vec<String>) -> Result<Self> {
        if y.len() != self.len() {
            return Err(PolygridError::DimensionMismatch(format!(
                "{} label rows for {} assessments",
                y.len(),
                self.len()
            )));
        }
        if label_names.len() != y.n_labels() {
            return Err(PolygridError::DimensionMismatch(format!(
                "{} label names for {} labels",
                label_names.len(),
                y.n_labels()
            )));
        }
        self.y = Some(y);
        self.label_names = label_names;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_domains(&self) -> usize {
        self.domain_names.len()
    }

    pub fn assignment(&self) -> Result<&Assignment> {
        self.y
            .as_ref()
            .ok_or_else(|| PolygridError::Empty(format!("dataset {} has no labels", self.name)))
    }

    /// Rows `idx`, keeping the parent's scaling.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            domain_names: self.domain_names.clone(),
            label_names: self.label_names.clone(),
            raw: idx.iter().map(|&i| self.raw[i].clone()).collect(),
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: self.y.as_ref().map(|y| y.subset(idx)),
            ranges: self.ranges.clone(),
            manifest: self.manifest.clone(),
        }
    }

    /// Row sums of the raw scores.
    pub fn sum_scores(&self) -> Vec<f64> {
        self.raw.iter().map(|r| r.iter().sum()).collect()
    }
}
