//! Multi-output CART regression trees grown best-first.
//!
//! Used both for tree-derived annulus radii and by the tree baselines.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PolygridError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CartParams {
    pub max_depth: Option<usize>,
    /// Budget in weights, counting 2 per split and 1 per leaf.
    pub max_size: Option<usize>,
    pub min_leaf: usize,
    /// Features drawn at each node; `None` considers all of them.
    pub max_features: Option<usize>,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: None,
            max_size: None,
            min_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    /// `(feature, threshold)` of every split in the order it was made.
    pub growth: Vec<(usize, f64)>,
}

struct Candidate {
    node: usize,
    depth: usize,
    rows: Vec<usize>,
    best: Option<BestSplit>,
}

#[derive(Clone)]
struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

fn mean(y: &[Vec<f64>], rows: &[usize]) -> Vec<f64> {
    let k = y[0].len();
    let mut acc = vec![0.0; k];
    for &i in rows {
        for (a, v) in acc.iter_mut().zip(&y[i]) {
            *a += v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= rows.len() as f64);
    acc
}

fn sse(y: &[Vec<f64>], rows: &[usize]) -> f64 {
    let mu = mean(y, rows);
    rows.iter()
        .map(|&i| y[i].iter().zip(&mu).map(|(v, m)| (v - m).powi(2)).sum::<f64>())
        .sum()
}

fn best_split<R: Rng>(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    rows: &[usize],
    params: &CartParams,
    rng: &mut R,
) -> Option<BestSplit> {
    let d = x[0].len();
    let k = y[0].len();
    let n = rows.len();
    if n < 2 * params.min_leaf.max(1) {
        return None;
    }
    let features: Vec<usize> = match params.max_features {
        Some(f) if f < d => {
            let mut v = sample(rng, d, f.max(1)).into_vec();
            v.sort_unstable();
            v
        }
        _ => (0..d).collect(),
    };
    let parent = sse(y, rows);
    let mut total = vec![0.0; k];
    let mut total_sq = 0.0;
    for &i in rows {
        for (t, v) in total.iter_mut().zip(&y[i]) {
            *t += v;
        }
        total_sq += y[i].iter().map(|v| v * v).sum::<f64>();
    }
    let mut best: Option<BestSplit> = None;
    let mut order = rows.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left = vec![0.0; k];
        let mut left_sq = 0.0;
        for cut in 1..n {
            let i = order[cut - 1];
            for (l, v) in left.iter_mut().zip(&y[i]) {
                *l += v;
            }
            left_sq += y[i].iter().map(|v| v * v).sum::<f64>();
            let lo = x[i][f];
            let hi = x[order[cut]][f];
            if hi <= lo || cut < params.min_leaf || n - cut < params.min_leaf {
                continue;
            }
            let nl = cut as f64;
            let nr = (n - cut) as f64;
            let l_sse = left_sq - left.iter().map(|s| s * s).sum::<f64>() / nl;
            let r_sse = (total_sq - left_sq)
                - total
                    .iter()
                    .zip(&left)
                    .map(|(t, l)| (t - l).powi(2))
                    .sum::<f64>()
                    / nr;
            let gain = parent - l_sse - r_sse;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain + 1e-12) {
                best = Some(BestSplit {
                    gain,
                    feature: f,
                    threshold: 0.5 * (lo + hi),
                    left: order[..cut].to_vec(),
                    right: order[cut..].to_vec(),
                });
            }
        }
    }
    best
}

impl RegressionTree {
    /// Fits `y` (rows of equal-length target vectors) on `x`.
    pub fn fit<R: Rng>(
        x: &[Vec<f64>],
        y: &[Vec<f64>],
        params: &CartParams,
        rng: &mut R,
    ) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(PolygridError::DimensionMismatch(format!(
                "tree needs matching non-empty inputs, got {} rows and {} targets",
                x.len(),
                y.len()
            )));
        }
        if x[0].is_empty() || y[0].is_empty() {
            return Err(PolygridError::Empty("tree inputs have no columns".into()));
        }
        let all: Vec<usize> = (0..x.len()).collect();
        let mut nodes = vec![Node::Leaf {
            value: mean(y, &all),
        }];
        let mut growth = Vec::new();
        let mut open = vec![Candidate {
            node: 0,
            depth: 0,
            best: None,
            rows: all,
        }];
        let depth_ok = |depth: usize| params.max_depth.is_none_or(|m| depth < m);
        if depth_ok(0) {
            open[0].best = best_split(x, y, &open[0].rows, params, rng);
        }
        let mut size = 1usize;
        loop {
            if params.max_size.is_some_and(|b| size + 3 > b) {
                break;
            }
            let pick = open
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.best.as_ref().map(|b| (i, b.gain)))
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            let Some((idx, _)) = pick else { break };
            let cand = open.swap_remove(idx);
            let split = cand.best.expect("picked candidate has a split");
            let left_id = nodes.len();
            let right_id = left_id + 1;
            nodes.push(Node::Leaf {
                value: mean(y, &split.left),
            });
            nodes.push(Node::Leaf {
                value: mean(y, &split.right),
            });
            nodes[cand.node] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: left_id,
                right: right_id,
            };
            growth.push((split.feature, split.threshold));
            size += 3;
            for (id, rows) in [(left_id, split.left), (right_id, split.right)] {
                let depth = cand.depth + 1;
                let best = if depth_ok(depth) {
                    best_split(x, y, &rows, params, rng)
                } else {
                    None
                };
                open.push(Candidate {
                    node: id,
                    depth,
                    rows,
                    best,
                });
            }
        }
        Ok(RegressionTree { nodes, growth })
    }

    pub fn predict(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_splits(&self) -> usize {
        self.growth.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.n_splits() + 1
    }

    /// Weight count: 2 per split, 1 per leaf.
    pub fn size(&self) -> usize {
        2 * self.n_splits() + self.n_leaves()
    }
}
