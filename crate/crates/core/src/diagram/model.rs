use serde::{Deserialize, Serialize};

use crate::error::{PolygridError, Result};
use crate::geometry::Polygon;
use crate::labels::Task;
use crate::model::{reorder_row, PolygridInstance, Prediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Assessment,
    Assignment,
    Matching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagState {
    Neutral,
    /// Score at or above the label threshold.
    Green,
    Yellow,
    /// Intercepts.
    Grey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tag {
    pub value: f64,
    pub state: TagState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub vertices: Vec<[f64; 2]>,
    pub weight: f64,
    /// Area of the assessment polygon inside the cell (matching charts).
    pub coverage: Option<f64>,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub kind: ChartKind,
    pub row: usize,
    pub col: usize,
    pub label: Option<usize>,
    pub assessment: Option<usize>,
    pub polygon: Vec<[f64; 2]>,
    pub axis_labels: Vec<String>,
    pub cells: Vec<Cell>,
    pub tag: Option<Tag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorTick {
    pub value: f64,
    pub color: String,
}

/// Diverging map centred at zero over `[-limit, limit]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorMap {
    pub limit: f64,
    pub ticks: Vec<ColorTick>,
}

const NEGATIVE: [f64; 3] = [59.0, 76.0, 192.0];
const MIDDLE: [f64; 3] = [247.0, 247.0, 247.0];
const POSITIVE: [f64; 3] = [180.0, 4.0, 38.0];

impl ColorMap {
    pub fn symmetric(weights: impl Iterator<Item = f64>) -> Self {
        let limit = weights.fold(0.0f64, |m, w| m.max(w.abs()));
        let mut map = ColorMap { limit, ticks: Vec::new() };
        let values: Vec<f64> = if limit > 0.0 {
            [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|t| t * limit).collect()
        } else {
            vec![0.0]
        };
        map.ticks = values
            .into_iter()
            .map(|value| ColorTick {
                value,
                color: map.color(value),
            })
            .collect();
        map
    }

    pub fn color(&self, w: f64) -> String {
        let t = if self.limit > 0.0 {
            (w / self.limit).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let end = if t < 0.0 { NEGATIVE } else { POSITIVE };
        let a = t.abs();
        let c: Vec<u8> = (0..3).map(|i| (MIDDLE[i] + (end[i] - MIDDLE[i]) * a).round() as u8).collect();
        format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
    }
}

/// Values needed to recompute a matching tag from its chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub feature_scale: f64,
    pub intercept: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramModel {
    pub rows: usize,
    pub cols: usize,
    pub config_tag: String,
    pub domain_names: Vec<String>,
    pub label_names: Vec<String>,
    /// Label index shown in each label column.
    pub column_order: Vec<usize>,
    pub color_map: ColorMap,
    pub charts: Vec<Chart>,
    /// Grey per-column tags, present when the solver fits intercepts.
    pub intercept_tags: Option<Vec<Tag>>,
    /// `readouts[a][c]` for assessment `a` and label column `c`.
    pub readouts: Vec<Vec<Readout>>,
}

fn points(p: &Polygon) -> Vec<[f64; 2]> {
    p.vertices.iter().map(|v| [v.x, v.y]).collect()
}

impl DiagramModel {
    pub fn chart_at(&self, row: usize, col: usize) -> Option<&Chart> {
        self.charts.iter().find(|c| c.row == row && c.col == col)
    }

    /// Recomputes a matching chart's score from its cells alone.
    pub fn recompute(&self, assessment: usize, col: usize) -> Option<f64> {
        let chart = self.chart_at(assessment + 1, col + 1)?;
        let r = &self.readouts[assessment][col];
        let dot: f64 = chart.cells.iter().map(|c| c.weight * c.coverage.unwrap_or(0.0)).sum();
        Some(r.feature_scale * dot + r.intercept + r.offset)
    }
}

/// Label columns sorted by ascending prototype area, ties by index.
pub fn prototype_order(instance: &PolygridInstance) -> Vec<usize> {
    let areas: Vec<f64> = instance
        .prototypes
        .iter()
        .map(|p| instance.roots.polygon(&reorder_row(p, &instance.vertex_order)).area())
        .collect();
    let mut order: Vec<usize> = (0..areas.len()).collect();
    order.sort_by(|&a, &b| areas[a].total_cmp(&areas[b]).then(a.cmp(&b)));
    order
}

/// Lays out the explanation grid for `predictions`, which must come from
/// `instance`. Row 0 holds the config tag and one assignment chart per
/// label; each further row holds an assessment chart and its matching
/// charts.
pub fn build_diagram(instance: &PolygridInstance, predictions: &[Prediction]) -> Result<DiagramModel> {
    let n = instance.n_labels();
    let n_cells = instance.partition.n_cells();
    for (i, p) in predictions.iter().enumerate() {
        if p.scores.len() != n || p.coverage.len() != n_cells || p.vertex_scores.len() != instance.n_domains() {
            return Err(PolygridError::DimensionMismatch(format!(
                "prediction {i} does not match the instance's labels or partition"
            )));
        }
    }
    let order = prototype_order(instance);
    let weights = &instance.presence.weights;
    let color_map = ColorMap::symmetric(weights.iter().flatten().copied());
    let axis_labels: Vec<String> = instance
        .vertex_order
        .iter()
        .map(|&k| instance.domain_names.get(k).cloned().unwrap_or_else(|| format!("D{k}")))
        .collect();
    let cells_for = |j: usize, coverage: Option<&[f64]>| -> Vec<Cell> {
        instance
            .partition
            .cells
            .iter()
            .enumerate()
            .map(|(r, cell)| Cell {
                vertices: points(cell),
                weight: weights[j][r],
                coverage: coverage.map(|c| c[r]),
                color: color_map.color(weights[j][r]),
            })
            .collect()
    };
    let multiclass = instance.task == Task::Multiclass;
    let mut charts = Vec::new();
    for (c, &j) in order.iter().enumerate() {
        let proto = reorder_row(&instance.prototypes[j], &instance.vertex_order);
        let threshold = instance.thresholds[j];
        charts.push(Chart {
            kind: ChartKind::Assignment,
            row: 0,
            col: c + 1,
            label: Some(j),
            assessment: None,
            polygon: points(&instance.roots.polygon(&proto)),
            axis_labels: axis_labels.clone(),
            cells: cells_for(j, None),
            tag: (!multiclass && threshold.is_finite()).then_some(Tag {
                value: threshold,
                state: TagState::Neutral,
            }),
        });
    }
    let mut readouts = Vec::with_capacity(predictions.len());
    for (a, p) in predictions.iter().enumerate() {
        let polygon = points(&instance.roots.polygon(&p.vertex_scores));
        charts.push(Chart {
            kind: ChartKind::Assessment,
            row: a + 1,
            col: 0,
            label: None,
            assessment: Some(a),
            polygon: polygon.clone(),
            axis_labels: axis_labels.clone(),
            cells: Vec::new(),
            tag: Some(Tag {
                value: p.area,
                state: TagState::Neutral,
            }),
        });
        let mut row_readouts = Vec::with_capacity(n);
        for (c, &j) in order.iter().enumerate() {
            let state = if p.scores[j] >= instance.thresholds[j] {
                TagState::Green
            } else {
                TagState::Yellow
            };
            charts.push(Chart {
                kind: ChartKind::Matching,
                row: a + 1,
                col: c + 1,
                label: Some(j),
                assessment: Some(a),
                polygon: polygon.clone(),
                axis_labels: axis_labels.clone(),
                cells: cells_for(j, Some(&p.coverage)),
                tag: Some(Tag {
                    value: p.scores[j],
                    state,
                }),
            });
            row_readouts.push(Readout {
                feature_scale: p.feature_scale,
                intercept: instance.presence.intercept(j),
                offset: instance.presence.offset,
            });
        }
        readouts.push(row_readouts);
    }
    let intercept_tags = instance.presence.intercepts.as_ref().map(|b| {
        order
            .iter()
            .map(|&j| Tag {
                value: b[j],
                state: TagState::Grey,
            })
            .collect()
    });
    Ok(DiagramModel {
        rows: predictions.len() + 1,
        cols: n + 1,
        config_tag: instance.config.tag(),
        domain_names: axis_labels,
        label_names: order.iter().map(|&j| instance.label_names[j].clone()).collect(),
        column_order: order,
        color_map,
        charts,
        intercept_tags,
        readouts,
    })
}
