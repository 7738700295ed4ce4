use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use polygrid::baselines::BaselineKind;
use polygrid::data::{
    all_covariances_positive, covariance_matrix, dataset_stats, load_csv, mcdonald_omega, read_csv, save_csv,
    sum_area_violation_test, synth_assignment, synth_congeneric, Arrangements, AssignmentSynthSpec, CongenericSpec,
    Dataset, Instrument,
};
use polygrid::diagram::{build_diagram, render_svg, SvgStyle};
use polygrid::eval::{
    compare_models, grid_search, read_results_csv, write_results_csv, ExperimentSettings, MetricKind, RankingReport,
    RunResult,
};
use polygrid::geometry::{AnnulusType, SectorType};
use polygrid::labels::Task;
use polygrid::model::{fit_dataset, CutoffScheme, GridSpec, PolygridConfig, PolygridInstance, VertexOrder};
use polygrid::solvers::SolverKind;

#[derive(Debug, Parser)]
#[command(name = "polygrid", version, about = "Interpretable recommendations for psychometric data")]
pub struct Cli {
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a CSV, unit-scale it, and write the prepared dataset.
    Prep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "multiclass")]
        task: Task,
        #[arg(long)]
        out: PathBuf,
        /// Also write the scaling manifest here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Generate a synthetic dataset from an instrument's congeneric model.
    Synth(SynthArgs),
    /// Fit a Polygrid instance.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict rows of a scores CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        scores: ScoresArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw explanation diagrams for rows of a scores CSV.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        scores: ScoresArgs,
        /// Row indices to include; all rows by default.
        #[arg(long, value_delimiter = ',')]
        rows: Option<Vec<usize>>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        diagram: Option<PathBuf>,
    },
    /// Evaluate a grid of configs and report the best per metric.
    Gridsearch {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        harness: HarnessArgs,
        /// Use the full grid instead of the configured one.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: PathBuf,
        /// Best configs per metric as JSON.
        #[arg(long)]
        best: Option<PathBuf>,
    },
    /// Compare a Polygrid config against size-matched baselines.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        harness: HarnessArgs,
        #[arg(long, value_delimiter = ',')]
        baselines: Option<Vec<BaselineKind>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dominance matrices and echelons from results tables.
    Rank {
        #[arg(long, num_args = 1.., required = true)]
        results: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        metrics: Option<Vec<MetricKind>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reliability, covariance and sum/area checks for a dataset.
    Validate {
        #[command(flatten)]
        data: DataArgs,
        /// Sample this many arrangements instead of testing all of them.
        #[arg(long)]
        arrangements: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve predictions and diagrams over HTTP.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file or a prepared dataset (`.json`).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "multiclass")]
    pub task: Task,
}

#[derive(Debug, Args)]
pub struct ScoresArgs {
    /// CSV with `domain:` columns.
    #[arg(long)]
    pub scores: PathBuf,
    /// Scores are already unit-scaled.
    #[arg(long)]
    pub scaled: bool,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub nspd: Option<usize>,
    #[arg(long)]
    pub na: Option<usize>,
    #[arg(long)]
    pub vorder: Option<VertexOrder>,
    #[arg(long)]
    pub annulus: Option<AnnulusType>,
    #[arg(long)]
    pub sector: Option<SectorType>,
    /// `lstsq`, `lstsqsym`, `lstsquni`, `ridge` or `ridge:<lambda>`.
    #[arg(long)]
    pub solver: Option<SolverKind>,
    #[arg(long)]
    pub cutoff: Option<CutoffScheme>,
}

#[derive(Debug, Args, Default)]
pub struct HarnessArgs {
    #[arg(long)]
    pub ss: Option<usize>,
    #[arg(long)]
    pub split_ratio: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<MetricKind>>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub instrument: Instrument,
    #[arg(long)]
    pub rows: Option<usize>,
    /// Drop measurement error from the generator.
    #[arg(long)]
    pub no_error: bool,
    /// `sumscore`, `multilabel` or `ranking`.
    #[arg(long, default_value = "sumscore")]
    pub mode: String,
    #[arg(long, default_value_t = 11)]
    pub labels: usize,
    #[arg(long, default_value_t = 1.08)]
    pub cardinality: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// JSON run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: PolygridConfig,
    pub experiment: ExperimentSettings,
    pub grid: Option<GridSpec>,
    pub baselines: Option<Vec<BaselineKind>>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
            }
            None => Ok(RunConfig::default()),
        }
    }

    fn apply_seed(&mut self, seed: Option<u64>) {
        if let Some(s) = seed {
            self.model.seed = s;
            self.experiment.seed = s;
        }
    }

    fn model_config(&self, a: &ModelArgs) -> PolygridConfig {
        let mut c = self.model.clone();
        if let Some(v) = a.nspd {
            c.ns_per_domain = v;
        }
        if let Some(v) = a.na {
            c.n_a = v;
        }
        if let Some(v) = a.vorder {
            c.vorder = v;
        }
        if let Some(v) = a.annulus {
            c.annulus = v;
        }
        if let Some(v) = a.sector {
            c.sector = v;
        }
        if let Some(v) = a.solver {
            c.solver = v;
        }
        if let Some(v) = a.cutoff {
            c.cutoff = v;
        }
        c
    }

    fn settings(&self, a: &HarnessArgs, task: Task) -> ExperimentSettings {
        let mut s = self.experiment.clone();
        if let Some(v) = a.ss {
            s.ss = v;
        }
        if let Some(v) = a.split_ratio {
            s.split_ratio = v;
        }
        if let Some(v) = a.alpha {
            s.alpha = v;
        }
        match &a.metrics {
            Some(m) => s.metrics = m.clone(),
            None if task == Task::LabelRanking && !s.metrics.iter().any(MetricKind::is_ranking) => {
                s.metrics = MetricKind::for_task(task)
            }
            None => {}
        }
        s
    }
}

pub fn load_dataset(d: &DataArgs) -> Result<Dataset> {
    let is_json = d.data.extension().is_some_and(|e| e == "json");
    if is_json {
        let text = fs::read_to_string(&d.data).with_context(|| format!("reading {}", d.data.display()))?;
        Ok(serde_json::from_str(&text)?)
    } else {
        Ok(load_csv(&d.data, d.task)?)
    }
}

pub fn load_instance(path: &Path) -> Result<PolygridInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(PolygridInstance::from_json(&text)?)
}

/// Reads `domain:` columns and returns rows ready for prediction.
pub fn load_scores(inst: &PolygridInstance, s: &ScoresArgs) -> Result<Vec<Vec<f64>>> {
    let file = File::open(&s.scores).with_context(|| format!("reading {}", s.scores.display()))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    let cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("domain:"))
        .map(|(c, _)| c)
        .collect();
    if cols.len() != inst.n_domains() {
        bail!("scores have {} domain columns, model expects {}", cols.len(), inst.n_domains());
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let raw = cols
            .iter()
            .map(|&c| {
                rec.get(c)
                    .unwrap_or("")
                    .parse::<f64>()
                    .with_context(|| format!("row {i}: non-numeric score"))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(if s.scaled { raw } else { inst.scale_raw(&raw, None)? });
    }
    Ok(rows)
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_results(path: &Path, results: &[RunResult]) -> Result<()> {
    let f = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    write_results_csv(BufWriter::new(f), results)?;
    Ok(())
}

#[derive(Serialize)]
struct PredictedRow {
    labels: Vec<String>,
    ranking: Option<Vec<String>>,
    scores: Vec<f64>,
}

#[derive(Serialize)]
struct ValidationReport {
    omega: Option<f64>,
    covariances_positive: bool,
    covariance: Vec<Vec<f64>>,
    stats: Option<polygrid::data::DatasetStats>,
    violations: polygrid::data::ViolationReport,
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply_seed(cli.seed);
    let seed = cli.seed.unwrap_or(cfg.experiment.seed);
    match cli.command {
        Command::Prep {
            input,
            task,
            out,
            manifest,
        } => {
            let name = input.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().into_owned());
            let ds = read_csv(File::open(&input).with_context(|| format!("reading {}", input.display()))?, task, &name)?;
            write_json(&ds, Some(&out))?;
            if let Some(m) = manifest {
                write_json(&ds.manifest, Some(&m))?;
            }
        }
        Command::Synth(a) => {
            let rows = a.rows.unwrap_or_else(|| a.instrument.default_rows());
            let mut spec: CongenericSpec = a.instrument.spec(rows);
            if a.no_error {
                spec = spec.without_error();
            }
            let ds = synth_congeneric(&spec, seed)?;
            let (y, names) = match a.mode.as_str() {
                "sumscore" => {
                    let (cutoffs, names) = a.instrument.classes();
                    (synth_assignment(&ds, &AssignmentSynthSpec::sumscore(cutoffs))?.0, names)
                }
                "multilabel" | "ranking" => {
                    let spec = AssignmentSynthSpec::fuzzy(a.labels, a.cardinality, a.mode == "ranking", seed);
                    let names = (0..a.labels).map(|j| format!("L{j}")).collect();
                    (synth_assignment(&ds, &spec)?.0, names)
                }
                other => bail!("unknown synthesis mode {other:?}"),
            };
            let ds = ds.with_assignment(y, names)?;
            save_csv(&ds, &a.out)?;
            if let Some(m) = a.manifest {
                write_json(&ds.manifest, Some(&m))?;
            }
        }
        Command::Fit { data, model, out } => {
            let ds = load_dataset(&data)?;
            let inst = fit_dataset(&ds, &cfg.model_config(&model))?;
            fs::write(&out, inst.to_json()? + "\n").with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Predict { model, scores, out } => {
            let inst = load_instance(&model)?;
            let rows = load_scores(&inst, &scores)?;
            let preds = inst.predict_many(&rows)?;
            let name = |j: &usize| inst.label_names[*j].clone();
            let doc: Vec<PredictedRow> = preds
                .iter()
                .map(|p| PredictedRow {
                    labels: (0..inst.n_labels()).filter(|&j| p.labels[j]).map(|j| name(&j)).collect(),
                    ranking: p.ranking.as_ref().map(|r| r.iter().map(name).collect()),
                    scores: p.scores.clone(),
                })
                .collect();
            write_json(&doc, out.as_deref())?;
        }
        Command::Explain {
            model,
            scores,
            rows,
            svg,
            diagram,
        } => {
            let inst = load_instance(&model)?;
            let all = load_scores(&inst, &scores)?;
            let picked: Vec<Vec<f64>> = match rows {
                Some(idx) => idx
                    .iter()
                    .map(|&i| all.get(i).cloned().with_context(|| format!("row {i} out of range")))
                    .collect::<Result<_>>()?,
                None => all,
            };
            let dm = build_diagram(&inst, &inst.predict_many(&picked)?)?;
            if svg.is_none() && diagram.is_none() {
                print!("{}", render_svg(&dm, &SvgStyle::default()));
            }
            if let Some(p) = svg {
                fs::write(&p, render_svg(&dm, &SvgStyle::default()))?;
            }
            if let Some(p) = diagram {
                write_json(&dm, Some(&p))?;
            }
        }
        Command::Gridsearch {
            data,
            harness,
            full,
            out,
            best,
        } => {
            let ds = load_dataset(&data)?;
            let settings = cfg.settings(&harness, data.task);
            let grid = if full { GridSpec::default() } else { cfg.grid.clone().unwrap_or_default() };
            let result = grid_search(&ds, &grid.configs(&cfg.model), &settings)?;
            let results: Vec<RunResult> = result.results().cloned().collect();
            write_results(&out, &results)?;
            let summary: Vec<serde_json::Value> = result
                .best
                .iter()
                .map(|(m, i)| {
                    let row = &result.rows[*i];
                    serde_json::json!({
                        "metric": m,
                        "index": row.index,
                        "tag": row.config.tag(),
                        "mean": row.experiment.result(*m).map(|r| r.mean),
                        "size": row.experiment.mean_size(),
                        "config": row.config,
                    })
                })
                .collect();
            write_json(&summary, best.as_deref())?;
        }
        Command::Evaluate {
            data,
            model,
            harness,
            baselines,
            out,
        } => {
            let ds = load_dataset(&data)?;
            let settings = cfg.settings(&harness, data.task);
            let kinds = baselines
                .or_else(|| cfg.baselines.clone())
                .unwrap_or_else(|| BaselineKind::ALL.to_vec());
            let exps = compare_models(&ds, &cfg.model_config(&model), &kinds, &settings)?;
            let results: Vec<RunResult> = exps.into_iter().flat_map(|e| e.results).collect();
            write_results(&out, &results)?;
        }
        Command::Rank { results, metrics, out } => {
            let mut all = Vec::new();
            for p in &results {
                let f = File::open(p).with_context(|| format!("reading {}", p.display()))?;
                all.extend(read_results_csv(f)?);
            }
            let mut ms: Vec<MetricKind> = metrics.unwrap_or_else(|| all.iter().map(|r| r.metric).collect());
            ms.sort();
            ms.dedup();
            let reports = ms
                .iter()
                .map(|&m| RankingReport::build(&all, m))
                .collect::<polygrid::Result<Vec<_>>>()?;
            for r in &reports {
                println!("{}", r.to_text());
            }
            if let Some(p) = out {
                write_json(&reports, Some(&p))?;
            }
        }
        Command::Validate {
            data,
            arrangements,
            out,
        } => {
            let ds = load_dataset(&data)?;
            let omega = ds
                .manifest
                .synthesis
                .as_ref()
                .and_then(|s| s.get("spec"))
                .and_then(|s| serde_json::from_value::<CongenericSpec>(s.clone()).ok())
                .map(|s| mcdonald_omega(&s.loadings, &s.error_variances()))
                .transpose()?;
            let arr = match arrangements {
                Some(count) => Arrangements::Sample { count, seed },
                None => Arrangements::All,
            };
            let report = ValidationReport {
                omega,
                covariances_positive: all_covariances_positive(&ds.x),
                covariance: covariance_matrix(&ds.x),
                stats: ds.y.is_some().then(|| dataset_stats(&ds)).transpose()?,
                violations: sum_area_violation_test(&ds.x, arr),
            };
            write_json(&report, out.as_deref())?;
        }
        Command::Serve { model, bind } => {
            let inst = load_instance(&model)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&bind).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                axum::serve(listener, crate::service::router(inst))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}
