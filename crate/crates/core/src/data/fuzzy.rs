use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::dataset::Dataset;
use crate::error::{PolygridError, Result};
use crate::labels::Assignment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyParams {
    pub fuzzifier: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for FuzzyParams {
    fn default() -> Self {
        FuzzyParams {
            fuzzifier: 2.0,
            max_iter: 300,
            tolerance: 1e-6,
        }
    }
}

/// Fuzzy c-means with Euclidean distance. Returns the `m x c` membership
/// matrix (rows sum to one). Centroids start at `c` distinct rows.
pub fn fuzzy_cmeans(x: &[Vec<f64>], c: usize, params: &FuzzyParams, seed: u64) -> Result<Vec<Vec<f64>>> {
    let m = x.len();
    if c == 0 || c > m {
        return Err(PolygridError::InvalidConfig(format!(
            "cannot form {c} clusters from {m} rows"
        )));
    }
    if !(params.fuzzifier > 1.0) {
        return Err(PolygridError::InvalidConfig("fuzzifier must exceed 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = sample(&mut rng, m, c).into_iter().map(|i| x[i].clone()).collect();
    let expo = 2.0 / (params.fuzzifier - 1.0);
    let mut u = vec![vec![0.0; c]; m];
    for _ in 0..params.max_iter {
        let mut delta = 0.0f64;
        for (i, row) in x.iter().enumerate() {
            let dist: Vec<f64> = centroids
                .iter()
                .map(|ctr| row.iter().zip(ctr).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                .collect();
            let new: Vec<f64> = if let Some(z) = dist.iter().position(|&v| v == 0.0) {
                (0..c).map(|j| if j == z { 1.0 } else { 0.0 }).collect()
            } else {
                (0..c)
                    .map(|j| 1.0 / dist.iter().map(|dk| (dist[j] / dk).powf(expo)).sum::<f64>())
                    .collect()
            };
            for (old, v) in u[i].iter_mut().zip(&new) {
                delta = delta.max((*old - v).abs());
                *old = *v;
            }
        }
        for (j, ctr) in centroids.iter_mut().enumerate() {
            let w: Vec<f64> = u.iter().map(|r| r[j].powf(params.fuzzifier)).collect();
            let total: f64 = w.iter().sum();
            if total > 0.0 {
                for (k, v) in ctr.iter_mut().enumerate() {
                    *v = x.iter().zip(&w).map(|(r, wi)| wi * r[k]).sum::<f64>() / total;
                }
            }
        }
        if delta < params.tolerance {
            break;
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SynthMode {
    /// Class = number of cutoffs not exceeding the raw sum-score.
    SumscoreCutoff { cutoffs: Vec<f64> },
    FuzzyMultilabel,
    /// λ-cut labels ordered by descending membership, optionally truncated.
    FuzzyRanking { top_k: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSynthSpec {
    pub mode: SynthMode,
    pub n_labels: usize,
    pub target_cardinality: f64,
    pub fuzzy: FuzzyParams,
    pub seed: u64,
}

impl AssignmentSynthSpec {
    pub fn fuzzy(n_labels: usize, target_cardinality: f64, ranking: bool, seed: u64) -> Self {
        AssignmentSynthSpec {
            mode: if ranking {
                SynthMode::FuzzyRanking { top_k: None }
            } else {
                SynthMode::FuzzyMultilabel
            },
            n_labels,
            target_cardinality,
            fuzzy: FuzzyParams::default(),
            seed,
        }
    }

    pub fn sumscore(cutoffs: Vec<f64>) -> Self {
        AssignmentSynthSpec {
            n_labels: cutoffs.len() + 1,
            mode: SynthMode::SumscoreCutoff { cutoffs },
            target_cardinality: 1.0,
            fuzzy: FuzzyParams::default(),
            seed: 0,
        }
    }
}

/// What the synthesis achieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    pub lambda: Option<f64>,
    pub cardinality: f64,
}

/// Labels kept for one membership row at cut `lambda`: the top label plus
/// every label with membership at least `lambda`, by descending membership.
pub fn lambda_cut_row(u: &[f64], lambda: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..u.len()).collect();
    idx.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    let mut out = vec![idx[0]];
    out.extend(idx[1..].iter().copied().filter(|&j| u[j] >= lambda));
    out
}

fn cut_all(u: &[Vec<f64>], lambda: f64, top_k: Option<usize>) -> Vec<Vec<usize>> {
    u.iter()
        .map(|r| {
            let mut l = lambda_cut_row(r, lambda);
            if let Some(k) = top_k {
                l.truncate(k.max(1));
            }
            l
        })
        .collect()
}

fn cardinality(rows: &[Vec<usize>]) -> f64 {
    rows.iter().map(Vec::len).sum::<usize>() as f64 / rows.len() as f64
}

pub const CARDINALITY_TOLERANCE: f64 = 0.02;

/// Finds a λ-cut whose mean labels per row is within 0.02 of `target`.
/// Achieved cardinality is non-increasing in λ, so bisection applies.
pub fn calibrate_lambda(u: &[Vec<f64>], target: f64, top_k: Option<usize>) -> Result<(f64, Vec<Vec<usize>>)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64 + 1e-9);
    let card_lo = cardinality(&cut_all(u, lo, top_k));
    let card_hi = cardinality(&cut_all(u, hi, top_k));
    if target > card_lo + CARDINALITY_TOLERANCE || target < card_hi - CARDINALITY_TOLERANCE {
        return Err(PolygridError::UnreachableCardinality {
            target,
            lo: card_hi,
            hi: card_lo,
        });
    }
    let mut best: Option<(f64, f64)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = cardinality(&cut_all(u, mid, top_k));
        if best.is_none_or(|(_, bc)| (c - target).abs() < (bc - target).abs()) {
            best = Some((mid, c));
        }
        if (c - target).abs() <= 1e-12 {
            break;
        }
        if c > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (lambda, c) = best.expect("bisection ran");
    if (c - target).abs() > CARDINALITY_TOLERANCE {
        return Err(PolygridError::UnreachableCardinality {
            target,
            lo: cardinality(&cut_all(u, hi, top_k)),
            hi: cardinality(&cut_all(u, lo, top_k)),
        });
    }
    Ok((lambda, cut_all(u, lambda, top_k)))
}

pub fn synth_assignment(ds: &Dataset, spec: &AssignmentSynthSpec) -> Result<(Assignment, SynthReport)> {
    let n = spec.n_labels;
    if n == 0 {
        return Err(PolygridError::InvalidConfig("need at least one label".into()));
    }
    match &spec.mode {
        SynthMode::SumscoreCutoff { cutoffs } => {
            if cutoffs.windows(2).any(|w| w[1] <= w[0]) {
                return Err(PolygridError::InvalidConfig("cutoffs must be ascending".into()));
            }
            let classes: Vec<usize> = ds
                .sum_scores()
                .iter()
                .map(|s| cutoffs.iter().filter(|&&c| *s >= c).count())
                .collect();
            Ok((
                Assignment::multiclass(cutoffs.len() + 1, classes)?,
                SynthReport {
                    lambda: None,
                    cardinality: 1.0,
                },
            ))
        }
        mode => {
            if !(spec.target_cardinality >= 1.0 && spec.target_cardinality <= n as f64) {
                return Err(PolygridError::InvalidConfig(format!(
                    "target cardinality {} outside [1, {n}]",
                    spec.target_cardinality
                )));
            }
            let u = fuzzy_cmeans(&ds.x, n, &spec.fuzzy, spec.seed)?;
            let top_k = match mode {
                SynthMode::FuzzyRanking { top_k } => *top_k,
                _ => None,
            };
            let (lambda, rows) = calibrate_lambda(&u, spec.target_cardinality, top_k)?;
            let report = SynthReport {
                lambda: Some(lambda),
                cardinality: cardinality(&rows),
            };
            let assignment = match mode {
                SynthMode::FuzzyRanking { .. } => Assignment::ranking(n, rows)?,
                _ => Assignment::multilabel(
                    n,
                    rows.iter()
                        .map(|r| (0..n).map(|j| r.contains(&j)).collect())
                        .collect(),
                )?,
            };
            Ok((assignment, report))
        }
    }
}
