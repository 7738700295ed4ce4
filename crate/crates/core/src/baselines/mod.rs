//! Alternative models used as size-matched competitors.

mod budget;
mod mlp;

use std::fmt;
use std::str::FromStr;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use budget::{hidden_units, mlp_size, mlp_size_schedule, WeightBudget};
pub use mlp::{Mlp, MlpParams};

use crate::cart::{CartParams, RegressionTree};
use crate::error::{PolygridError, Result};
use crate::labels::{membership_row, Assignment, LabelPredictions, Task};
use crate::model::{decide, rank_labels};
use crate::solvers::{solve_weights_multi, SolverKind, DEFAULT_RIDGE_LAMBDA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Linear,
    Ridge,
    Random,
    Dt,
    Brdt,
    Rf,
    Brrf,
    Mlp,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 8] = [
        BaselineKind::Linear,
        BaselineKind::Ridge,
        BaselineKind::Random,
        BaselineKind::Dt,
        BaselineKind::Brdt,
        BaselineKind::Rf,
        BaselineKind::Brrf,
        BaselineKind::Mlp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::Linear => "Linear",
            BaselineKind::Ridge => "Ridge",
            BaselineKind::Random => "Random",
            BaselineKind::Dt => "DT",
            BaselineKind::Brdt => "BRDT",
            BaselineKind::Rf => "RF",
            BaselineKind::Brrf => "BRRF",
            BaselineKind::Mlp => "MLP",
        }
    }

    /// Whether the model's size follows a weight budget.
    pub fn is_budgeted(&self) -> bool {
        matches!(
            self,
            BaselineKind::Dt | BaselineKind::Brdt | BaselineKind::Rf | BaselineKind::Brrf | BaselineKind::Mlp
        )
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = PolygridError;
    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| PolygridError::InvalidConfig(format!("unknown baseline {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub ridge_lambda: f64,
    pub mlp: MlpParams,
    /// Tree cap for each per-label forest.
    pub brrf_max_trees: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            mlp: MlpParams::default(),
            brrf_max_trees: 10,
        }
    }
}

/// Maps a score row to real-valued outputs: `n` presence outputs, followed
/// by `n` membership outputs for ranking tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Regressor {
    Linear {
        weights: Vec<Vec<f64>>,
        intercepts: Option<Vec<f64>>,
    },
    Tree(RegressionTree),
    /// One tree per label, each predicting that label's outputs.
    PerLabelTrees(Vec<RegressionTree>),
    Forest(Vec<RegressionTree>),
    PerLabelForests(Vec<Vec<RegressionTree>>),
    Mlp(Mlp),
    Random { prevalence: Vec<f64>, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedBaseline {
    pub kind: BaselineKind,
    pub task: Task,
    pub n_labels: usize,
    regressor: Regressor,
    pub warnings: Vec<String>,
}

fn average(trees: &[RegressionTree], row: &[f64]) -> Vec<f64> {
    let mut acc = trees[0].predict(row).to_vec();
    for t in &trees[1..] {
        for (a, v) in acc.iter_mut().zip(t.predict(row)) {
            *a += v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= trees.len() as f64);
    acc
}

/// Per-label targets: presence, then membership for rankings.
fn targets(y: &Assignment) -> Vec<Vec<f64>> {
    let n = y.n_labels();
    let presence = y.presence();
    match y.rankings() {
        Some(r) => presence
            .iter()
            .zip(r)
            .map(|(p, rank)| {
                p.iter()
                    .map(|&b| f64::from(u8::from(b)))
                    .chain(membership_row(rank, n))
                    .collect()
            })
            .collect(),
        None => presence
            .iter()
            .map(|p| p.iter().map(|&b| f64::from(u8::from(b))).collect())
            .collect(),
    }
}

/// Columns `j` and `n + j` (when present) of the target matrix.
fn label_targets(t: &[Vec<f64>], j: usize, n: usize) -> Vec<Vec<f64>> {
    t.iter()
        .map(|r| if r.len() > n { vec![r[j], r[n + j]] } else { vec![r[j]] })
        .collect()
}

fn tree_budget(budget: i64, warnings: &mut Vec<String>, what: &str) -> usize {
    if budget < 4 {
        warnings.push(format!("{what}: budget {budget} below one split, using a single split"));
        4
    } else {
        budget as usize
    }
}

fn bootstrap<R: Rng>(x: &[Vec<f64>], y: &[Vec<f64>], rng: &mut R) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = x.len();
    let idx: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
    (
        idx.iter().map(|&i| x[i].clone()).collect(),
        idx.iter().map(|&i| y[i].clone()).collect(),
    )
}

fn forest<R: Rng>(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    n_trees: usize,
    per_tree: Option<usize>,
    rng: &mut R,
) -> Result<Vec<RegressionTree>> {
    let d = x[0].len();
    let params = CartParams {
        max_size: per_tree,
        max_features: Some((d as f64).sqrt().ceil() as usize),
        ..CartParams::default()
    };
    (0..n_trees)
        .map(|_| {
            let (bx, by) = bootstrap(x, y, rng);
            RegressionTree::fit(&bx, &by, &params, rng)
        })
        .collect()
}

/// Fits a baseline on unit-scaled rows. `budget` is the weight count to
/// aim for (tree and MLP models only); its repetition index drives the
/// MLP's rounding direction.
pub fn fit_baseline(
    kind: BaselineKind,
    x: &[Vec<f64>],
    y: &Assignment,
    budget: Option<&WeightBudget>,
    seed: u64,
    params: &BaselineParams,
) -> Result<FittedBaseline> {
    if x.is_empty() || x.len() != y.len() {
        return Err(PolygridError::DimensionMismatch(format!(
            "{} rows but {} label rows",
            x.len(),
            y.len()
        )));
    }
    let n = y.n_labels();
    let d = x[0].len();
    let t = targets(y);
    let n_out = t[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let wanted = budget.map(WeightBudget::compensated);
    let regressor = match kind {
        BaselineKind::Linear => {
            // unpenalised intercept through a constant column
            let xa: Vec<Vec<f64>> = x.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
            let cols: Vec<Vec<f64>> = (0..n_out).map(|j| t.iter().map(|r| r[j]).collect()).collect();
            let fits = solve_weights_multi(&xa, &cols, SolverKind::Lstsq)?;
            Regressor::Linear {
                intercepts: Some(fits.iter().map(|f| f.weights[d]).collect()),
                weights: fits.into_iter().map(|mut f| {
                    f.weights.truncate(d);
                    f.weights
                }).collect(),
            }
        }
        BaselineKind::Ridge => {
            let solver = SolverKind::Ridge {
                lambda: params.ridge_lambda,
            };
            let cols: Vec<Vec<f64>> = (0..n_out).map(|j| t.iter().map(|r| r[j]).collect()).collect();
            let fits = solve_weights_multi(x, &cols, solver)?;
            Regressor::Linear {
                intercepts: Some(fits.iter().map(|f| f.intercept.unwrap_or(0.0)).collect()),
                weights: fits.into_iter().map(|f| f.weights).collect(),
            }
        }
        BaselineKind::Random => {
            let presence = y.presence();
            let m = presence.len() as f64;
            Regressor::Random {
                prevalence: (0..n)
                    .map(|j| presence.iter().filter(|r| r[j]).count() as f64 / m)
                    .collect(),
                seed,
            }
        }
        BaselineKind::Dt => {
            let max_size = wanted.map(|b| tree_budget(b, &mut warnings, "DT"));
            let p = CartParams {
                max_size,
                ..CartParams::default()
            };
            Regressor::Tree(RegressionTree::fit(x, &t, &p, &mut rng)?)
        }
        BaselineKind::Brdt => {
            let per_label = wanted.map(|b| tree_budget(b / n as i64, &mut warnings, "BRDT"));
            let p = CartParams {
                max_size: per_label,
                ..CartParams::default()
            };
            Regressor::PerLabelTrees(
                (0..n)
                    .map(|j| RegressionTree::fit(x, &label_targets(&t, j, n), &p, &mut rng))
                    .collect::<Result<_>>()?,
            )
        }
        BaselineKind::Rf => {
            let (n_trees, per_tree) = match wanted {
                Some(b) => {
                    let n_trees = ((b / 4).max(1) as usize).min(n);
                    (n_trees, Some(tree_budget(b / n_trees as i64, &mut warnings, "RF")))
                }
                None => (n, None),
            };
            Regressor::Forest(forest(x, &t, n_trees, per_tree, &mut rng)?)
        }
        BaselineKind::Brrf => {
            let cap = params.brrf_max_trees.max(1);
            let (n_trees, per_tree) = match wanted {
                Some(b) => {
                    let per_label = b / n as i64;
                    let n_trees = ((per_label / 4).max(1) as usize).min(cap);
                    (
                        n_trees,
                        Some(tree_budget(per_label / n_trees as i64, &mut warnings, "BRRF")),
                    )
                }
                None => (cap, None),
            };
            Regressor::PerLabelForests(
                (0..n)
                    .map(|j| forest(x, &label_targets(&t, j, n), n_trees, per_tree, &mut rng))
                    .collect::<Result<_>>()?,
            )
        }
        BaselineKind::Mlp => {
            let hidden = match budget {
                Some(b) => {
                    let (h, clamped) = hidden_units(b.compensated(), d, n_out, b.repetition() % 2 == 0);
                    if clamped {
                        warnings.push(format!("MLP: budget {} too small, using one hidden unit", b.compensated()));
                    }
                    h
                }
                None => d.max(2),
            };
            Regressor::Mlp(Mlp::train(x, &t, hidden, &params.mlp, seed))
        }
    };
    Ok(FittedBaseline {
        kind,
        task: y.task(),
        n_labels: n,
        regressor,
        warnings,
    })
}

impl FittedBaseline {
    /// Weight count: 2 per split and 1 per leaf for trees, every dense
    /// weight otherwise; the Random model counts one prevalence per label.
    pub fn size(&self) -> usize {
        match &self.regressor {
            Regressor::Linear { weights, intercepts } => {
                weights.iter().map(Vec::len).sum::<usize>() + intercepts.as_ref().map_or(0, Vec::len)
            }
            Regressor::Tree(t) => t.size(),
            Regressor::PerLabelTrees(ts) | Regressor::Forest(ts) => ts.iter().map(RegressionTree::size).sum(),
            Regressor::PerLabelForests(fs) => fs.iter().flatten().map(RegressionTree::size).sum(),
            Regressor::Mlp(net) => net.n_weights(),
            Regressor::Random { prevalence, .. } => prevalence.len(),
        }
    }

    fn outputs(&self, row: &[f64]) -> Vec<f64> {
        let n = self.n_labels;
        let ranking = self.task == Task::LabelRanking;
        match &self.regressor {
            Regressor::Linear { weights, intercepts } => weights
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
                        + intercepts.as_ref().map_or(0.0, |b| b[j])
                })
                .collect(),
            Regressor::Tree(t) => t.predict(row).to_vec(),
            Regressor::Forest(ts) => average(ts, row),
            Regressor::PerLabelTrees(ts) => {
                let per: Vec<Vec<f64>> = ts.iter().map(|t| t.predict(row).to_vec()).collect();
                interleave(&per, n, ranking)
            }
            Regressor::PerLabelForests(fs) => {
                let per: Vec<Vec<f64>> = fs.iter().map(|f| average(f, row)).collect();
                interleave(&per, n, ranking)
            }
            Regressor::Mlp(net) => net.predict(row),
            Regressor::Random { .. } => unreachable!("random model has no outputs"),
        }
    }

    fn predict_random(&self, x: &[Vec<f64>], prevalence: &[f64], seed: u64) -> LabelPredictions {
        let n = self.n_labels;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f7a_b1e5);
        let categorical = WeightedIndex::new(prevalence.iter().map(|p| p.max(1e-12))).ok();
        let mut out = LabelPredictions::default();
        let mut rankings = Vec::new();
        for _ in x {
            let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mut labels: Vec<bool> = u.iter().zip(prevalence).map(|(u, p)| u < p).collect();
            if self.task == Task::Multiclass || (self.task == Task::LabelRanking && !labels.contains(&true)) {
                labels = vec![false; n];
                if let Some(c) = &categorical {
                    labels[c.sample(&mut rng)] = true;
                }
            }
            if self.task == Task::LabelRanking {
                // prevalence-weighted draw without replacement
                let mut present: Vec<usize> = (0..n).filter(|&j| labels[j]).collect();
                let mut order = Vec::with_capacity(present.len());
                while !present.is_empty() {
                    let w: Vec<f64> = present.iter().map(|&j| prevalence[j].max(1e-12)).collect();
                    let k = WeightedIndex::new(&w).map_or(0, |d| d.sample(&mut rng));
                    order.push(present.remove(k));
                }
                rankings.push(order);
            }
            out.scores.push(u.iter().zip(prevalence).map(|(u, p)| p - u).collect());
            out.labels.push(labels);
        }
        if self.task == Task::LabelRanking {
            out.rankings = Some(rankings);
        }
        out
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> LabelPredictions {
        if let Regressor::Random { prevalence, seed } = &self.regressor {
            return self.predict_random(x, prevalence, *seed);
        }
        let n = self.n_labels;
        let half = vec![0.5; n];
        let never = vec![f64::INFINITY; n];
        let mut out = LabelPredictions::default();
        let mut rankings = Vec::new();
        for row in x {
            let o = self.outputs(row);
            let presence = o[..n].to_vec();
            let labels = if self.task == Task::Multiclass {
                decide(&presence, &never, true)
            } else {
                decide(&presence, &half, false)
            };
            if self.task == Task::LabelRanking {
                rankings.push(rank_labels(&labels, &presence, &o[n..]));
            }
            out.scores.push(presence);
            out.labels.push(labels);
        }
        if self.task == Task::LabelRanking {
            out.rankings = Some(rankings);
        }
        out
    }
}

/// Reassembles per-label `[presence]` or `[presence, membership]` outputs
/// into presence block followed by membership block.
fn interleave(per: &[Vec<f64>], n: usize, ranking: bool) -> Vec<f64> {
    let mut o: Vec<f64> = per.iter().map(|v| v[0]).collect();
    if ranking {
        o.extend((0..n).map(|j| per[j][1]));
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Assignment) {
        let x: Vec<Vec<f64>> = (1..=40)
            .map(|i| {
                let v = i as f64 / 40.0;
                vec![v, 0.5 + v / 4.0, 0.3, 0.9 - v / 2.0]
            })
            .collect();
        let classes = x.iter().map(|r| usize::from(r[0] > 0.5)).collect();
        (x, Assignment::multiclass(2, classes).unwrap())
    }

    #[test]
    fn linear_counts_weights_and_intercepts() {
        let (x, y) = toy();
        let p = BaselineParams::default();
        let f = fit_baseline(BaselineKind::Linear, &x, &y, None, 0, &p).unwrap();
        assert_eq!(f.size(), 10);
        assert_eq!(f.predict(&x).labels, y.presence());
        let f = fit_baseline(BaselineKind::Ridge, &x, &y, None, 0, &p).unwrap();
        assert_eq!(f.size(), 10);
    }

    #[test]
    fn stump_on_separable_data() {
        let (x, y) = toy();
        let f = fit_baseline(BaselineKind::Dt, &x, &y, None, 0, &BaselineParams::default()).unwrap();
        assert_eq!(f.size(), 4);
        let pred = f.predict(&x);
        assert_eq!(pred.labels, y.presence());
    }

    #[test]
    fn forests_respect_tree_caps() {
        let (x, y) = toy();
        let p = BaselineParams::default();
        let budget = WeightBudget::new(1000);
        let rf = fit_baseline(BaselineKind::Rf, &x, &y, Some(&budget), 3, &p).unwrap();
        match &rf.regressor {
            Regressor::Forest(ts) => assert!(ts.len() <= 2),
            _ => unreachable!(),
        }
        let brrf = fit_baseline(BaselineKind::Brrf, &x, &y, Some(&budget), 3, &p).unwrap();
        match &brrf.regressor {
            Regressor::PerLabelForests(fs) => assert!(fs.iter().all(|f| f.len() <= 10)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let (x, y) = toy();
        let p = BaselineParams::default();
        let f = fit_baseline(BaselineKind::Random, &x, &y, None, 9, &p).unwrap();
        assert_eq!(f.predict(&x), f.predict(&x));
        assert!(f.predict(&x).labels.iter().all(|r| r.iter().filter(|&&b| b).count() == 1));
    }

    #[test]
    fn names_parse() {
        for k in BaselineKind::ALL {
            assert_eq!(k.name().parse::<BaselineKind>().unwrap(), k);
        }
    }
}
