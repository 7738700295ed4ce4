use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PolygridError, Result};
use crate::geometry::{check_scaled_row, DiscPartition, RootsOfUnity};
use crate::labels::Task;
use crate::model::config::PolygridConfig;
use crate::model::order::reorder_row;
use crate::solvers::Readout;

pub const FORMAT_VERSION: u32 = 1;

/// One linear readout per label over the cell features:
/// `score_j = scale * <s, weights_j> + intercept_j + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReadouts {
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Option<Vec<f64>>,
    pub offset: f64,
}

impl LabelReadouts {
    pub fn from_readouts(readouts: &[Readout]) -> Self {
        let has_intercepts = readouts.iter().all(|r| r.intercept.is_some()) && !readouts.is_empty();
        LabelReadouts {
            weights: readouts.iter().map(|r| r.weights.clone()).collect(),
            intercepts: has_intercepts.then(|| readouts.iter().map(|r| r.intercept.unwrap()).collect()),
            offset: readouts.first().map_or(0.0, |r| r.offset),
        }
    }

    pub fn n_weights(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.intercepts.as_ref().map_or(0, Vec::len)
    }

    pub fn intercept(&self, j: usize) -> f64 {
        self.intercepts.as_ref().map_or(0.0, |b| b[j])
    }

    /// Per-cell terms for label `j`.
    pub fn contributions(&self, j: usize, coverage: &[f64], scale: f64) -> Vec<f64> {
        coverage
            .iter()
            .zip(&self.weights[j])
            .map(|(s, w)| scale * w * s)
            .collect()
    }

    pub fn score(&self, j: usize, coverage: &[f64], scale: f64) -> f64 {
        self.contributions(j, coverage, scale).iter().sum::<f64>() + self.intercept(j) + self.offset
    }

    pub fn scores(&self, coverage: &[f64], scale: f64) -> Vec<f64> {
        (0..self.weights.len())
            .map(|j| self.score(j, coverage, scale))
            .collect()
    }
}

/// Output of a single prediction plus every intermediate quantity an
/// explanation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
    pub ranking: Option<Vec<usize>>,
    pub membership_scores: Option<Vec<f64>>,
    /// Scores in vertex order.
    pub vertex_scores: Vec<f64>,
    /// Polygon area covering each cell.
    pub coverage: Vec<f64>,
    pub area: f64,
    /// Row multiplier applied before the weights (1 unless feature rows are
    /// normalised).
    pub feature_scale: f64,
    /// `contributions[j][r]` sums over `r` to `scores[j]` minus the label's
    /// intercept and the readout offset.
    pub contributions: Vec<Vec<f64>>,
}

/// A fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct PolygridInstance {
    pub config: PolygridConfig,
    pub task: Task,
    pub domain_names: Vec<String>,
    pub label_names: Vec<String>,
    /// Column maxima used to scale raw scores, when known.
    pub scaling_maxima: Option<Vec<f64>>,
    pub vertex_order: Vec<usize>,
    pub presence: LabelReadouts,
    /// `+inf` marks a label that never occurred in training.
    pub thresholds: Vec<f64>,
    pub empty_labels: Vec<usize>,
    /// Mean unit-scaled scores of each label's training rows, in the
    /// original domain order.
    pub prototypes: Vec<Vec<f64>>,
    pub membership: Option<LabelReadouts>,
    pub roots: RootsOfUnity,
    pub partition: DiscPartition,
}

fn ser_thresholds<S: Serializer>(t: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Option<f64>> = t.iter().map(|x| x.is_finite().then_some(*x)).collect();
    v.serialize(s)
}

fn de_thresholds<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    let v: Vec<Option<f64>> = Vec::deserialize(d)?;
    Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
}

/// Serialized form: the partition is stored by its radii and rebuilt.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceDoc {
    format_version: u32,
    config: PolygridConfig,
    task: Task,
    domain_names: Vec<String>,
    label_names: Vec<String>,
    scaling_maxima: Option<Vec<f64>>,
    vertex_order: Vec<usize>,
    radii: Vec<f64>,
    presence: LabelReadouts,
    #[serde(serialize_with = "ser_thresholds", deserialize_with = "de_thresholds")]
    thresholds: Vec<f64>,
    empty_labels: Vec<usize>,
    prototypes: Vec<Vec<f64>>,
    membership: Option<LabelReadouts>,
}

impl From<PolygridInstance> for InstanceDoc {
    fn from(i: PolygridInstance) -> Self {
        InstanceDoc {
            format_version: FORMAT_VERSION,
            config: i.config,
            task: i.task,
            domain_names: i.domain_names,
            label_names: i.label_names,
            scaling_maxima: i.scaling_maxima,
            vertex_order: i.vertex_order,
            radii: i.partition.radii,
            presence: i.presence,
            thresholds: i.thresholds,
            empty_labels: i.empty_labels,
            prototypes: i.prototypes,
            membership: i.membership,
        }
    }
}

impl TryFrom<InstanceDoc> for PolygridInstance {
    type Error = PolygridError;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        if doc.format_version != FORMAT_VERSION {
            return Err(PolygridError::Serialization(format!(
                "unsupported instance format {}",
                doc.format_version
            )));
        }
        let d = doc.domain_names.len();
        let n = doc.label_names.len();
        let mut sorted = doc.vertex_order.clone();
        sorted.sort_unstable();
        if sorted != (0..d).collect::<Vec<_>>() {
            return Err(PolygridError::Serialization("vertex order is not a permutation".into()));
        }
        let tree = (doc.config.annulus == crate::geometry::AnnulusType::Tree)
            .then(|| doc.radii[..doc.radii.len().saturating_sub(1)].to_vec());
        let partition = DiscPartition::new(d, &doc.config.partition_spec(d, tree))?;
        let cells = partition.n_cells();
        let shape_ok = |r: &LabelReadouts| {
            r.weights.len() == n
                && r.weights.iter().all(|w| w.len() == cells)
                && r.intercepts.as_ref().is_none_or(|b| b.len() == n)
        };
        if !shape_ok(&doc.presence)
            || !doc.membership.as_ref().is_none_or(shape_ok)
            || doc.thresholds.len() != n
            || doc.prototypes.len() != n
        {
            return Err(PolygridError::Serialization(
                "weight, threshold or prototype shapes disagree with names and partition".into(),
            ));
        }
        Ok(PolygridInstance {
            roots: RootsOfUnity::new(d)?,
            partition,
            config: doc.config,
            task: doc.task,
            domain_names: doc.domain_names,
            label_names: doc.label_names,
            scaling_maxima: doc.scaling_maxima,
            vertex_order: doc.vertex_order,
            presence: doc.presence,
            thresholds: doc.thresholds,
            empty_labels: doc.empty_labels,
            prototypes: doc.prototypes,
            membership: doc.membership,
        })
    }
}

/// Thresholds each score; a multiclass row with no positive falls back to
/// its highest score.
pub fn decide(scores: &[f64], thresholds: &[f64], multiclass: bool) -> Vec<bool> {
    let mut labels: Vec<bool> = scores.iter().zip(thresholds).map(|(s, t)| s >= t).collect();
    if multiclass && !labels.iter().any(|&l| l) {
        if let Some(j) = argmax(scores) {
            labels[j] = true;
        }
    }
    labels
}

pub(crate) fn argmax(v: &[f64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(j, _)| j)
}

/// Present labels ordered by descending membership, ties by label index.
/// Falls back to the best presence score when nothing is present.
pub fn rank_labels(labels: &[bool], presence: &[f64], membership: &[f64]) -> Vec<usize> {
    let mut present: Vec<usize> = (0..labels.len()).filter(|&j| labels[j]).collect();
    if present.is_empty() {
        return argmax(presence).into_iter().collect();
    }
    present.sort_by(|&a, &b| membership[b].total_cmp(&membership[a]).then(a.cmp(&b)));
    present
}

impl PolygridInstance {
    pub fn n_domains(&self) -> usize {
        self.domain_names.len()
    }

    pub fn n_labels(&self) -> usize {
        self.label_names.len()
    }

    /// Weight count: cell weights, intercepts, and membership readouts.
    pub fn size(&self) -> usize {
        self.presence.n_weights() + self.membership.as_ref().map_or(0, LabelReadouts::n_weights)
    }

    /// Converts raw scores with the given (or stored) column maxima.
    pub fn scale_raw(&self, raw: &[f64], maxima: Option<&[f64]>) -> Result<Vec<f64>> {
        let maxima = maxima
            .or(self.scaling_maxima.as_deref())
            .ok_or_else(|| PolygridError::InvalidConfig("no scaling maxima available".into()))?;
        if maxima.len() != raw.len() {
            return Err(PolygridError::DimensionMismatch(format!(
                "{} raw scores but {} maxima",
                raw.len(),
                maxima.len()
            )));
        }
        Ok(raw.iter().zip(maxima).map(|(x, m)| x / m).collect())
    }

    /// Predicts one unit-scaled row given in the original domain order.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.n_domains() {
            return Err(PolygridError::DimensionMismatch(format!(
                "expected {} scores, got {}",
                self.n_domains(),
                x.len()
            )));
        }
        check_scaled_row(0, x)?;
        let vertex_scores = reorder_row(x, &self.vertex_order);
        let polygon = self.roots.polygon(&vertex_scores);
        let coverage = self.partition.coverage(&polygon);
        let scale = self.config.solver.row_scale(&coverage);
        let n = self.n_labels();
        let contributions: Vec<Vec<f64>> = (0..n)
            .map(|j| self.presence.contributions(j, &coverage, scale))
            .collect();
        let scores: Vec<f64> = contributions
            .iter()
            .enumerate()
            .map(|(j, c)| c.iter().sum::<f64>() + self.presence.intercept(j) + self.presence.offset)
            .collect();
        let labels = decide(&scores, &self.thresholds, self.task == Task::Multiclass);
        let (ranking, membership_scores) = match &self.membership {
            Some(m) => {
                let u = m.scores(&coverage, scale);
                (Some(rank_labels(&labels, &scores, &u)), Some(u))
            }
            None => (None, None),
        };
        Ok(Prediction {
            area: polygon.area(),
            scores,
            labels,
            ranking,
            membership_scores,
            vertex_scores,
            coverage,
            feature_scale: scale,
            contributions,
        })
    }

    pub fn predict_many(&self, rows: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                self.predict(r).map_err(|e| match e {
                    PolygridError::ScoreOutOfRange { col, value, .. } => {
                        PolygridError::ScoreOutOfRange { row: i, col, value }
                    }
                    PolygridError::NonFinite { col, .. } => PolygridError::NonFinite { row: i, col },
                    other => other,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
