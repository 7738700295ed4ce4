use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cart::{CartParams, RegressionTree};
use crate::data::Dataset;
use crate::error::{PolygridError, Result};
use crate::geometry::{check_scaled_row, AnnulusType, DiscPartition, RootsOfUnity};
use crate::labels::{membership_row, Assignment, Task};
use crate::model::config::{CutoffScheme, PolygridConfig};
use crate::model::instance::{decide, LabelReadouts, PolygridInstance};
use crate::model::order::{order_vertices, reorder_row};
use crate::solvers::{solve_weights_multi, Readout, SolverKind};

const RADIUS_GAP: f64 = 0.02;

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Inner annulus radii taken from a regression tree of depth
/// `ceil(log2(n_a))` fitted on the scores against `target`.
///
/// Split thresholds are used in the order they were grown, rounded to two
/// decimals and kept only if at least 0.02 away from 0, 1 and each other.
/// Missing radii are filled by bisecting the widest gap.
pub fn tree_radii(x: &[Vec<f64>], target: &[f64], n_a: usize) -> Result<Vec<f64>> {
    let want = n_a.saturating_sub(1);
    if want == 0 {
        return Ok(Vec::new());
    }
    let depth = (usize::BITS - (n_a - 1).leading_zeros()) as usize;
    let y: Vec<Vec<f64>> = target.iter().map(|&t| vec![t]).collect();
    let params = CartParams {
        max_depth: Some(depth),
        ..CartParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let tree = RegressionTree::fit(x, &y, &params, &mut rng)?;
    let admissible = |r: f64, taken: &[f64]| {
        (RADIUS_GAP - 1e-9..=1.0 - RADIUS_GAP + 1e-9).contains(&r)
            && taken.iter().all(|t| (t - r).abs() >= RADIUS_GAP - 1e-9)
    };
    let mut radii: Vec<f64> = Vec::with_capacity(want);
    for &(_, threshold) in &tree.growth {
        if radii.len() == want {
            break;
        }
        let r = round2(threshold);
        if admissible(r, &radii) {
            radii.push(r);
        }
    }
    while radii.len() < want {
        let mut bounds = radii.clone();
        bounds.push(0.0);
        bounds.push(1.0);
        bounds.sort_by(f64::total_cmp);
        let (lo, hi) = bounds
            .windows(2)
            .map(|w| (w[0], w[1]))
            .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)).then(b.0.total_cmp(&a.0)))
            .expect("at least one gap");
        let mid = round2(0.5 * (lo + hi));
        radii.push(if admissible(mid, &radii) { mid } else { 0.5 * (lo + hi) });
    }
    radii.sort_by(f64::total_cmp);
    Ok(radii)
}

/// Evenly spaced candidates over `[lo, hi]`.
fn candidates(lo: f64, hi: f64, granularity: usize) -> Vec<f64> {
    let g = granularity.max(2);
    (0..g)
        .map(|k| lo + (hi - lo) * k as f64 / (g - 1) as f64)
        .collect()
}

/// Value at the middle of the first run of maximal score.
fn pick_best(cands: &[f64], score: impl Fn(f64) -> f64) -> f64 {
    let values: Vec<f64> = cands.iter().map(|&t| score(t)).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = values.iter().position(|&v| v == best).unwrap_or(0);
    let end = values[start..]
        .iter()
        .position(|&v| v != best)
        .map_or(values.len(), |k| start + k);
    cands[(start + end - 1) / 2]
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        1.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Chosen thresholds plus labels that never occur in `truth`.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub values: Vec<f64>,
    pub empty_labels: Vec<usize>,
}

/// Picks decision thresholds from training reconstructions `scores`
/// (`m x n`). `multiple` maximises each label's F1; `single` shares one
/// threshold maximising subset accuracy.
pub fn select_thresholds(
    scores: &[Vec<f64>],
    truth: &[Vec<bool>],
    scheme: CutoffScheme,
    granularity: usize,
    multiclass: bool,
) -> Thresholds {
    let n = truth.first().map_or(0, Vec::len);
    let empty_labels: Vec<usize> = (0..n).filter(|&j| truth.iter().all(|r| !r[j])).collect();
    let active: Vec<usize> = (0..n).filter(|j| !empty_labels.contains(j)).collect();
    let mut values = vec![f64::INFINITY; n];
    if active.is_empty() {
        return Thresholds {
            values,
            empty_labels,
        };
    }
    let range = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    match scheme {
        CutoffScheme::Multiple => {
            for &j in &active {
                let (lo, hi) = range(&mut scores.iter().map(|r| r[j]));
                values[j] = pick_best(&candidates(lo, hi, granularity), |t| {
                    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
                    for (s, y) in scores.iter().zip(truth) {
                        match (s[j] >= t, y[j]) {
                            (true, true) => tp += 1,
                            (true, false) => fp += 1,
                            (false, true) => fn_ += 1,
                            _ => {}
                        }
                    }
                    f1(tp, fp, fn_)
                });
            }
        }
        CutoffScheme::Single => {
            let (lo, hi) = range(&mut scores.iter().flat_map(|r| active.iter().map(move |&j| r[j])));
            let shared = pick_best(&candidates(lo, hi, granularity), |t| {
                let th: Vec<f64> = (0..n)
                    .map(|j| if active.contains(&j) { t } else { f64::INFINITY })
                    .collect();
                scores
                    .iter()
                    .zip(truth)
                    .filter(|(s, y)| decide(s, &th, multiclass) == **y)
                    .count() as f64
            });
            for &j in &active {
                values[j] = shared;
            }
        }
    }
    Thresholds {
        values,
        empty_labels,
    }
}

struct Features {
    order: Vec<usize>,
    roots: RootsOfUnity,
    partition: DiscPartition,
    coverage: Vec<Vec<f64>>,
    scales: Vec<f64>,
}

fn check_inputs(x: &[Vec<f64>], m_labels: usize) -> Result<usize> {
    let d = x
        .first()
        .map(Vec::len)
        .ok_or_else(|| PolygridError::Empty("no training rows".into()))?;
    if m_labels != x.len() {
        return Err(PolygridError::DimensionMismatch(format!(
            "{} assessment rows but {} label rows",
            x.len(),
            m_labels
        )));
    }
    for (i, r) in x.iter().enumerate() {
        if r.len() != d {
            return Err(PolygridError::DimensionMismatch(format!(
                "row {i} has {} scores, expected {d}",
                r.len()
            )));
        }
        check_scaled_row(i, r)?;
    }
    Ok(d)
}

fn extract(x: &[Vec<f64>], first_target: &[f64], cfg: &PolygridConfig) -> Result<Features> {
    cfg.validate()?;
    let d = x[0].len();
    let order = order_vertices(x, cfg.vorder);
    let xr: Vec<Vec<f64>> = x.iter().map(|r| reorder_row(r, &order)).collect();
    let tree = if cfg.annulus == AnnulusType::Tree {
        Some(tree_radii(x, first_target, cfg.n_a)?)
    } else {
        None
    };
    let roots = RootsOfUnity::new(d)?;
    let partition = DiscPartition::new(d, &cfg.partition_spec(d, tree))?;
    let coverage: Vec<Vec<f64>> = xr
        .iter()
        .map(|r| partition.coverage(&roots.polygon(r)))
        .collect();
    let scales = coverage.iter().map(|s| cfg.solver.row_scale(s)).collect();
    Ok(Features {
        order,
        roots,
        partition,
        coverage,
        scales,
    })
}

fn fit_readouts(f: &Features, targets: &[Vec<f64>], solver: SolverKind) -> Result<LabelReadouts> {
    let fits = solve_weights_multi(&f.coverage, targets, solver)?;
    let readouts: Vec<Readout> = fits.iter().map(|fit| fit.readout(solver)).collect();
    Ok(LabelReadouts::from_readouts(&readouts))
}

fn prototypes(x: &[Vec<f64>], presence: &[Vec<bool>], n: usize) -> Vec<Vec<f64>> {
    let d = x[0].len();
    (0..n)
        .map(|j| {
            let rows: Vec<&Vec<f64>> = x.iter().zip(presence).filter(|(_, y)| y[j]).map(|(r, _)| r).collect();
            if rows.is_empty() {
                return vec![0.0; d];
            }
            (0..d)
                .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64)
                .collect()
        })
        .collect()
}

fn default_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}{j}")).collect()
}

fn fit_presence(
    x: &[Vec<f64>],
    presence: &[Vec<bool>],
    n: usize,
    task: Task,
    cfg: &PolygridConfig,
) -> Result<(PolygridInstance, Features)> {
    let targets: Vec<Vec<f64>> = (0..n)
        .map(|j| presence.iter().map(|y| if y[j] { 1.0 } else { 0.0 }).collect())
        .collect();
    let first = targets.first().cloned().unwrap_or_else(|| vec![0.0; x.len()]);
    let feats = extract(x, &first, cfg)?;
    let readouts = fit_readouts(&feats, &targets, cfg.solver)?;
    let recon: Vec<Vec<f64>> = feats
        .coverage
        .iter()
        .zip(&feats.scales)
        .map(|(s, &k)| readouts.scores(s, k))
        .collect();
    let th = select_thresholds(
        &recon,
        presence,
        cfg.cutoff,
        cfg.threshold_granularity,
        task == Task::Multiclass,
    );
    let d = x[0].len();
    let instance = PolygridInstance {
        config: cfg.clone(),
        task,
        domain_names: default_names("D", d),
        label_names: default_names("L", n),
        scaling_maxima: None,
        vertex_order: feats.order.clone(),
        presence: readouts,
        thresholds: th.values,
        empty_labels: th.empty_labels,
        prototypes: prototypes(x, presence, n),
        membership: None,
        roots: feats.roots.clone(),
        partition: feats.partition.clone(),
    };
    Ok((instance, feats))
}

/// Fits a multilabel model on unit-scaled rows `x` and presence matrix `y`.
pub fn fit_multilabel(x: &[Vec<f64>], y: &[Vec<bool>], cfg: &PolygridConfig) -> Result<PolygridInstance> {
    check_inputs(x, y.len())?;
    let n = y[0].len();
    if let Some(i) = y.iter().position(|r| r.len() != n) {
        return Err(PolygridError::DimensionMismatch(format!(
            "label row {i} has {} entries, expected {n}",
            y[i].len()
        )));
    }
    Ok(fit_presence(x, y, n, Task::Multilabel, cfg)?.0)
}

/// Fits a label-ranking model: presence readouts as in the multilabel
/// case, plus membership readouts that order the present labels.
pub fn fit_labelranking(
    x: &[Vec<f64>],
    rankings: &[Vec<usize>],
    n: usize,
    cfg: &PolygridConfig,
) -> Result<PolygridInstance> {
    check_inputs(x, rankings.len())?;
    let assignment = Assignment::ranking(n, rankings.to_vec())?;
    let presence = assignment.presence();
    let (mut inst, feats) = fit_presence(x, &presence, n, Task::LabelRanking, cfg)?;
    let u: Vec<Vec<f64>> = rankings.iter().map(|r| membership_row(r, n)).collect();
    let targets: Vec<Vec<f64>> = (0..n).map(|j| u.iter().map(|row| row[j]).collect()).collect();
    inst.membership = Some(fit_readouts(&feats, &targets, cfg.solver)?);
    Ok(inst)
}

/// Fits whichever task `y` encodes.
pub fn fit(x: &[Vec<f64>], y: &Assignment, cfg: &PolygridConfig) -> Result<PolygridInstance> {
    match y {
        Assignment::Ranking { n, rows } => fit_labelranking(x, rows, *n, cfg),
        Assignment::Multiclass { n, .. } => {
            check_inputs(x, y.len())?;
            Ok(fit_presence(x, &y.presence(), *n, Task::Multiclass, cfg)?.0)
        }
        Assignment::Multilabel { rows, .. } => fit_multilabel(x, rows, cfg),
    }
}

/// Fits on a labelled dataset, carrying over names and scaling maxima.
pub fn fit_dataset(ds: &Dataset, cfg: &PolygridConfig) -> Result<PolygridInstance> {
    let mut inst = fit(&ds.x, ds.assignment()?, cfg)?;
    inst.domain_names = ds.domain_names.clone();
    inst.label_names = ds.label_names.clone();
    inst.scaling_maxima = Some(ds.manifest.maxima.clone());
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidates_span_range() {
        let c = candidates(0.0, 1.0, 101);
        assert_eq!(c.len(), 101);
        assert_eq!(c[0], 0.0);
        assert_eq!(c[100], 1.0);
        assert!((c[50] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn best_run_center() {
        let c = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(pick_best(&c, |t| if (1.0..=3.0).contains(&t) { 1.0 } else { 0.0 }), 2.0);
        assert_eq!(pick_best(&c, |t| if t >= 4.0 { 1.0 } else { 0.0 }), 4.0);
        assert_eq!(pick_best(&c, |_| 0.0), 2.0);
    }

    #[test]
    fn multiple_scheme_separates_each_label() {
        let scores = vec![vec![0.1, 0.9], vec![0.2, 0.8], vec![0.8, 0.1], vec![0.9, 0.2]];
        let truth = vec![
            vec![false, true],
            vec![false, true],
            vec![true, false],
            vec![true, false],
        ];
        let th = select_thresholds(&scores, &truth, CutoffScheme::Multiple, 101, false);
        for (s, y) in scores.iter().zip(&truth) {
            assert_eq!(&decide(s, &th.values, false), y);
        }
        assert!(th.empty_labels.is_empty());
    }

    #[test]
    fn empty_label_gets_infinite_threshold() {
        let scores = vec![vec![0.3, 0.1], vec![0.7, 0.2]];
        let truth = vec![vec![false, false], vec![true, false]];
        for scheme in [CutoffScheme::Single, CutoffScheme::Multiple] {
            let th = select_thresholds(&scores, &truth, scheme, 11, false);
            assert_eq!(th.values[1], f64::INFINITY);
            assert_eq!(th.empty_labels, vec![1]);
        }
    }

    #[test]
    fn all_positive_label_threshold_at_minimum() {
        let scores = vec![vec![0.9], vec![1.1], vec![1.0]];
        let truth = vec![vec![true]; 3];
        let th = select_thresholds(&scores, &truth, CutoffScheme::Single, 101, false);
        assert!(th.values[0] <= 0.9);
    }

    #[test]
    fn tree_radii_come_from_splits() {
        // target switches where the first score crosses 0.5
        let x: Vec<Vec<f64>> = (1..=40)
            .map(|i| {
                let v = i as f64 / 40.0;
                vec![v, 1.0 - v / 2.0, 0.5]
            })
            .collect();
        let y: Vec<f64> = x.iter().map(|r| if r[0] > 0.5 { 1.0 } else { 0.0 }).collect();
        let r = tree_radii(&x, &y, 2).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.51).abs() < 0.011, "{r:?}");
        let r = tree_radii(&x, &y, 8).unwrap();
        assert_eq!(r.len(), 7);
        assert!(r.windows(2).all(|w| w[1] - w[0] >= RADIUS_GAP - 1e-9));
        assert!(r[0] >= RADIUS_GAP - 1e-9 && r[6] <= 1.0 - RADIUS_GAP + 1e-9);
        assert!(tree_radii(&x, &y, 1).unwrap().is_empty());
    }
}
