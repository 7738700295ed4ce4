use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::metrics::{metric, MetricKind};
use crate::baselines::{fit_baseline, BaselineKind, BaselineParams, WeightBudget};
use crate::data::Dataset;
use crate::error::{PolygridError, Result};
use crate::labels::{Assignment, LabelPredictions};
use crate::model::{fit, PolygridConfig, PolygridInstance, Prediction};

/// Converts Polygrid predictions to the model-agnostic form.
pub fn to_label_predictions(preds: &[Prediction]) -> LabelPredictions {
    let rankings: Option<Vec<Vec<usize>>> = preds.iter().map(|p| p.ranking.clone()).collect();
    LabelPredictions {
        labels: preds.iter().map(|p| p.labels.clone()).collect(),
        scores: preds.iter().map(|p| p.scores.clone()).collect(),
        rankings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Polygrid { config: PolygridConfig },
    Baseline { kind: BaselineKind, params: BaselineParams },
}

impl ModelSpec {
    pub fn polygrid(config: PolygridConfig) -> Self {
        ModelSpec::Polygrid { config }
    }

    pub fn baseline(kind: BaselineKind) -> Self {
        ModelSpec::Baseline {
            kind,
            params: BaselineParams::default(),
        }
    }

    pub fn model_name(&self) -> String {
        match self {
            ModelSpec::Polygrid { .. } => "Polygrid".into(),
            ModelSpec::Baseline { kind, .. } => kind.name().into(),
        }
    }

    pub fn config_id(&self) -> String {
        match self {
            ModelSpec::Polygrid { config } => config.tag(),
            ModelSpec::Baseline { .. } => "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSettings {
    /// Repetitions per model.
    pub ss: usize,
    /// Share of rows used for training.
    pub split_ratio: f64,
    pub seed: u64,
    /// Two-sided significance level of the confidence intervals.
    pub alpha: f64,
    pub metrics: Vec<MetricKind>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            ss: 50,
            split_ratio: 0.8,
            seed: 0,
            alpha: 0.05,
            metrics: MetricKind::CLASSIFICATION.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    /// Set when the sample is too small for an interval.
    pub degenerate: bool,
}

impl ConfidenceInterval {
    /// Two-sided Student-t interval around the sample mean.
    pub fn student_t(sample: &[f64], alpha: f64) -> Self {
        let m = crate::stats::mean(sample);
        if sample.len() < 2 {
            return ConfidenceInterval {
                lo: m,
                hi: m,
                alpha,
                degenerate: true,
            };
        }
        let n = sample.len() as f64;
        let sd = crate::stats::variance(sample).sqrt();
        let t = StudentsT::new(0.0, 1.0, n - 1.0)
            .expect("degrees of freedom are positive")
            .inverse_cdf(1.0 - alpha / 2.0);
        let half = t * sd / n.sqrt();
        ConfidenceInterval {
            lo: m - half,
            hi: m + half,
            alpha,
            degenerate: false,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn overlaps(&self, other: &ConfidenceInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub model: String,
    pub config: String,
    pub metric: MetricKind,
    pub sample: Vec<f64>,
    pub mean: f64,
    pub ci: ConfidenceInterval,
}

impl RunResult {
    pub fn from_sample(dataset: &str, model: &str, config: &str, metric: MetricKind, sample: Vec<f64>, alpha: f64) -> Self {
        RunResult {
            dataset: dataset.into(),
            model: model.into(),
            config: config.into(),
            metric,
            mean: crate::stats::mean(&sample),
            ci: ConfidenceInterval::student_t(&sample, alpha),
            sample,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub results: Vec<RunResult>,
    /// Model size at each repetition.
    pub sizes: Vec<usize>,
    /// Splits redrawn because a label was missing from training.
    pub redraws: usize,
    pub warnings: Vec<String>,
}

impl Experiment {
    pub fn mean_size(&self) -> f64 {
        self.sizes.iter().sum::<usize>() as f64 / self.sizes.len().max(1) as f64
    }

    pub fn result(&self, metric: MetricKind) -> Option<&RunResult> {
        self.results.iter().find(|r| r.metric == metric)
    }
}

/// Seed for repetition `rep`, draw `sub` (splitmix64 finaliser).
pub fn split_seed(seed: u64, rep: usize, sub: usize) -> u64 {
    let mut z = seed
        .wrapping_add((rep as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add((sub as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub const MAX_REDRAWS: usize = 100;

/// A train/test split of row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub redraws: usize,
}

/// Draws the split for repetition `rep`. Labels present in the data must
/// all appear in training; otherwise the split is redrawn with the next
/// sub-seed, up to `MAX_REDRAWS` times.
pub fn draw_split(y: &Assignment, ratio: f64, seed: u64, rep: usize) -> Result<Split> {
    let m = y.len();
    let n_train = ((m as f64) * ratio).round() as usize;
    if n_train == 0 || n_train >= m {
        return Err(PolygridError::InvalidConfig(format!(
            "split ratio {ratio} leaves an empty side for {m} rows"
        )));
    }
    let presence = y.presence();
    let n = y.n_labels();
    let present: Vec<usize> = (0..n).filter(|&j| presence.iter().any(|r| r[j])).collect();
    let mut idx: Vec<usize> = (0..m).collect();
    for sub in 0..=MAX_REDRAWS {
        idx.sort_unstable();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(split_seed(seed, rep, sub)));
        let train = &idx[..n_train];
        let complete = present.iter().all(|&j| train.iter().any(|&i| presence[i][j]));
        if complete || sub == MAX_REDRAWS {
            let mut train = train.to_vec();
            let mut test = idx[n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            return Ok(Split { train, test, redraws: sub });
        }
    }
    unreachable!()
}

fn subset(x: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| x[i].clone()).collect()
}

/// Fits a Polygrid instance on a split, for callers that need the model.
pub fn fit_split(ds: &Dataset, config: &PolygridConfig, split: &Split) -> Result<PolygridInstance> {
    let y = ds.assignment()?;
    fit(&subset(&ds.x, &split.train), &y.subset(&split.train), config)
}

/// Runs `settings.ss` train/test repetitions of one model. `budget` is the
/// size the baselines aim for on average.
pub fn run_experiment(
    ds: &Dataset,
    spec: &ModelSpec,
    settings: &ExperimentSettings,
    budget: Option<usize>,
) -> Result<Experiment> {
    if settings.ss == 0 {
        return Err(PolygridError::InvalidConfig("ss must be positive".into()));
    }
    let y = ds.assignment()?;
    let mut samples = vec![Vec::with_capacity(settings.ss); settings.metrics.len()];
    let mut sizes = Vec::with_capacity(settings.ss);
    let mut redraws = 0;
    let mut warnings = Vec::new();
    let mut weight_budget = budget.map(WeightBudget::new);
    for rep in 0..settings.ss {
        let split = draw_split(y, settings.split_ratio, settings.seed, rep)?;
        redraws += split.redraws;
        if split.redraws == MAX_REDRAWS {
            warnings.push(format!("repetition {rep}: a label is missing from training after {MAX_REDRAWS} redraws"));
        }
        let x_train = subset(&ds.x, &split.train);
        let y_train = y.subset(&split.train);
        let x_test = subset(&ds.x, &split.test);
        let y_test = y.subset(&split.test);
        let (pred, size) = match spec {
            ModelSpec::Polygrid { config } => {
                let inst = fit(&x_train, &y_train, config)?;
                (to_label_predictions(&inst.predict_many(&x_test)?), inst.size())
            }
            ModelSpec::Baseline { kind, params } => {
                let seed = split_seed(settings.seed ^ 0xba5e, rep, 0);
                let b = kind.is_budgeted().then_some(weight_budget.as_ref()).flatten();
                let model = fit_baseline(*kind, &x_train, &y_train, b, seed, params)?;
                warnings.extend(model.warnings.iter().map(|w| format!("repetition {rep}: {w}")));
                if let Some(b) = weight_budget.as_mut() {
                    b.record(model.size());
                }
                (model.predict(&x_test), model.size())
            }
        };
        sizes.push(size);
        for (s, &m) in samples.iter_mut().zip(&settings.metrics) {
            s.push(metric(m, &y_test, &pred)?);
        }
    }
    let model = spec.model_name();
    let config = spec.config_id();
    let results = settings
        .metrics
        .iter()
        .zip(samples)
        .map(|(&m, s)| RunResult::from_sample(&ds.name, &model, &config, m, s, settings.alpha))
        .collect();
    Ok(Experiment {
        results,
        sizes,
        redraws,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub index: usize,
    pub config: PolygridConfig,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub rows: Vec<GridRow>,
    /// Row index of the best config for each metric.
    pub best: Vec<(MetricKind, usize)>,
}

impl GridSearchResult {
    pub fn best_config(&self, metric: MetricKind) -> Option<&PolygridConfig> {
        self.best
            .iter()
            .find(|(m, _)| *m == metric)
            .map(|&(_, i)| &self.rows[i].config)
    }

    pub fn results(&self) -> impl Iterator<Item = &RunResult> {
        self.rows.iter().flat_map(|r| &r.experiment.results)
    }
}

/// Evaluates every config, then picks per metric the best mean, breaking
/// ties by smaller model size and then lower index.
pub fn grid_search(ds: &Dataset, configs: &[PolygridConfig], settings: &ExperimentSettings) -> Result<GridSearchResult> {
    let rows: Vec<GridRow> = configs
        .par_iter()
        .enumerate()
        .map(|(index, config)| {
            run_experiment(ds, &ModelSpec::polygrid(config.clone()), settings, None).map(|experiment| GridRow {
                index,
                config: config.clone(),
                experiment,
            })
        })
        .collect::<Result<_>>()?;
    let best = settings
        .metrics
        .iter()
        .enumerate()
        .filter_map(|(k, &m)| {
            (0..rows.len())
                .reduce(|a, b| {
                    let (ma, mb) = (rows[a].experiment.results[k].mean, rows[b].experiment.results[k].mean);
                    if m.better(mb, ma)
                        || (mb == ma && rows[b].experiment.mean_size() < rows[a].experiment.mean_size())
                    {
                        b
                    } else {
                        a
                    }
                })
                .map(|i| (m, i))
        })
        .collect();
    Ok(GridSearchResult { rows, best })
}

/// Runs Polygrid with `config` and then each baseline with the Polygrid
/// model's mean size as budget.
pub fn compare_models(
    ds: &Dataset,
    config: &PolygridConfig,
    baselines: &[BaselineKind],
    settings: &ExperimentSettings,
) -> Result<Vec<Experiment>> {
    let poly = run_experiment(ds, &ModelSpec::polygrid(config.clone()), settings, None)?;
    let target = poly.mean_size().round() as usize;
    let mut out = vec![poly];
    let rest: Vec<Experiment> = baselines
        .par_iter()
        .map(|&k| run_experiment(ds, &ModelSpec::baseline(k), settings, Some(target)))
        .collect::<Result<_>>()?;
    out.extend(rest);
    Ok(out)
}
