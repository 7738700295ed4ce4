//! Acceptance gate. Each test prints one PASS/FAIL line and then asserts.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use polygrid::baselines::{mlp_size_schedule, BaselineKind};
use polygrid::data::{
    assignment_stats, instrument_dataset, load_csv, sum_area_violation_test, synth_assignment, synth_congeneric,
    Arrangements, AssignmentSynthSpec, CongenericSpec, Instrument,
};
use polygrid::diagram::{build_diagram, render_svg, SvgStyle};
use polygrid::eval::{
    compare_models, dominance_and_echelons, echelons, grid_search, run_experiment, ExperimentSettings, MetricKind,
    ModelSpec, RunResult,
};
use polygrid::geometry::{AnnulusType, DiscPartition, PartitionSpec, RootsOfUnity, SectorType, DEFAULT_ARC_RESOLUTION};
use polygrid::labels::{downgrade, logranks, Assignment, Task};
use polygrid::model::{cyclic_arrangements, fit, CutoffScheme, GridSpec, PolygridConfig, VertexOrder};
use polygrid::solvers::SolverKind;

fn verdict(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} failed: {detail}");
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed < Duration::from_secs(limit_s)
}

#[test]
fn geometry_conservation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let assessments: Vec<Vec<f64>> = (0..1000)
        .map(|_| {
            let d = rng.random_range(3..=8);
            (0..d).map(|_| rng.random_range(1e-6..=1.0)).collect()
        })
        .collect();
    let mut shapes = Vec::new();
    for ns_per_domain in 1..=3 {
        for n_a in 1..=8 {
            for annulus in [AnnulusType::SInvariant, AnnulusType::RInvariant, AnnulusType::Tree] {
                for sector in [SectorType::Cover, SectorType::Miss] {
                    shapes.push((ns_per_domain, n_a, annulus, sector));
                }
            }
        }
    }
    assert_eq!(shapes.len(), 144);
    // (worst relative coverage error, worst disc-area error)
    let (cov_err, disc_err) = shapes
        .par_iter()
        .enumerate()
        .map(|(k, &(nsd, n_a, annulus, sector))| {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let tree_radii = (annulus == AnnulusType::Tree).then(|| {
                let mut r: Vec<f64> = (1..n_a).map(|_| rng.random_range(0.05..0.95)).collect();
                r.sort_by(f64::total_cmp);
                r.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
                if r.len() < n_a - 1 {
                    r = (1..n_a).map(|p| p as f64 / n_a as f64).collect();
                }
                r
            });
            let mut worst = (0.0f64, 0.0f64);
            for d in 3..=8 {
                let partition = DiscPartition::new(
                    d,
                    &PartitionSpec {
                        n_a,
                        n_s: nsd * d,
                        annulus,
                        sector,
                        tree_radii: tree_radii.clone(),
                        arc_resolution: DEFAULT_ARC_RESOLUTION,
                    },
                )
                .unwrap();
                let disc: f64 = partition.cells.iter().map(|c| c.area()).sum();
                worst.1 = worst.1.max((disc - PI).abs());
                let roots = RootsOfUnity::new(d).unwrap();
                for a in assessments.iter().filter(|a| a.len() == d) {
                    let poly = roots.polygon(a);
                    let mu = poly.area();
                    let total: f64 = partition.coverage(&poly).iter().sum();
                    worst.0 = worst.0.max((total - mu).abs() / mu);
                }
            }
            worst
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let elapsed = start.elapsed();
    verdict(
        "geometry conservation",
        cov_err < 1e-6 && disc_err < 1e-3 && within(elapsed, 120),
        &format!("max rel coverage err {cov_err:.2e}, max |sum cells - pi| {disc_err:.2e}, {elapsed:.1?}"),
    );
}

#[test]
fn worked_examples() {
    let mut failures = Vec::new();
    if downgrade(&[vec![1, 2, -1, -1]], 4).unwrap() != vec![vec![0, 1, 1, 0]] {
        failures.push("downgrade");
    }
    let u = logranks(&[vec![3, 2, -1, -1]], 4).unwrap();
    let want = [0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0];
    if u[0].iter().zip(want).any(|(a, b)| (a - b).abs() > 1e-9) {
        failures.push("logranks");
    }
    let roots = RootsOfUnity::new(4).unwrap();
    let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
    if roots.zeta.iter().zip(want).any(|(z, w)| (z.x - w.0).abs() > 1e-9 || (z.y - w.1).abs() > 1e-9) {
        failures.push("roots of unity");
    }
    let schedule = mlp_size_schedule(18, 4, 2, 10);
    let mean = schedule.iter().sum::<usize>() as f64 / schedule.len() as f64;
    if (mean - 17.4).abs() > 1e-9 {
        failures.push("mlp schedule");
    }
    // Polygrid(1,1) with miss sectors: features are cyclic interactions.
    let partition = DiscPartition::new(
        4,
        &PartitionSpec {
            n_a: 1,
            n_s: 4,
            annulus: AnnulusType::SInvariant,
            sector: SectorType::Miss,
            tree_radii: None,
            arc_resolution: DEFAULT_ARC_RESOLUTION,
        },
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..=1.0)).collect();
        let s = partition.coverage(&roots.polygon(&x));
        let nu = roots.nu();
        let phi = [x[0] * x[1], x[1] * x[2], x[2] * x[3], x[3] * x[0]];
        if s.iter().zip(phi).any(|(a, b)| (a - nu * b).abs() > 1e-9) {
            failures.push("cyclic interactions");
            break;
        }
    }
    let classes: Vec<usize> = (0..100).map(|i| usize::from(i >= 41)).collect();
    let stats = assignment_stats(&Assignment::multiclass(2, classes).unwrap(), 4);
    if (stats.imbalance - (1.0 - 41.0 / 59.0)).abs() > 1e-9 || (stats.imbalance - 0.31).abs() > 0.005 {
        failures.push("imbalance");
    }
    verdict(
        "worked examples",
        failures.is_empty(),
        &format!(
            "mlp sizes {schedule:?} mean {mean}, imbalance {:.4}, failed {failures:?}",
            stats.imbalance
        ),
    );
}

fn equal_range_spec(d: usize, m: usize) -> CongenericSpec {
    CongenericSpec {
        name: format!("congeneric-d{d}"),
        domain_names: (0..d).map(|k| format!("D{k}")).collect(),
        m,
        loadings: (0..d).map(|k| 0.6 + 0.1 * k as f64).collect(),
        eta_mean: 10.0,
        eta_sd: 2.5,
        error_sd: vec![0.0; d],
        ranges: vec![(1.0, 20.0); d],
    }
}

#[test]
fn sum_area_monotonicity() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for (d, m, expected) in [(4, 100, 3), (5, 200, 12)] {
        let ds = synth_congeneric(&equal_range_spec(d, m), 11).unwrap();
        let report = sum_area_violation_test(&ds.x, Arrangements::All);
        let arrangements = report.arrangements.len();
        pass &= arrangements == expected
            && cyclic_arrangements(d).len() == expected
            && report.total_violations == 0
            && report.total_pairs > 0;
        details.push(format!(
            "d={d}: {arrangements} arrangements, {} pairs, {} violations",
            report.total_pairs, report.total_violations
        ));
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 60);
    verdict("sum-area monotonicity", pass, &format!("{}; {elapsed:.1?}", details.join("; ")));
}

fn accuracy(ds: &polygrid::data::Dataset, cfg: &PolygridConfig, settings: &ExperimentSettings) -> RunResult {
    run_experiment(ds, &ModelSpec::polygrid(cfg.clone()), settings, None)
        .unwrap()
        .results
        .remove(0)
}

#[test]
fn whoqol_config_ordering() {
    let start = Instant::now();
    let ds = instrument_dataset(Instrument::Whoqol, 100, 1).unwrap();
    let settings = ExperimentSettings {
        ss: 100,
        split_ratio: 0.8,
        seed: 7,
        metrics: vec![MetricKind::Accuracy],
        ..ExperimentSettings::default()
    };
    let default = PolygridConfig::default();
    let best = PolygridConfig {
        sector: SectorType::Cover,
        solver: SolverKind::ridge(),
        cutoff: CutoffScheme::Single,
        ..default.clone()
    };
    let two_annuli = PolygridConfig { n_a: 2, ..default.clone() };
    let h = accuracy(&ds, &best, &settings);
    let a = accuracy(&ds, &default, &settings);
    let b = accuracy(&ds, &two_annuli, &settings);
    let elapsed = start.elapsed();
    let pass_a = h.mean >= 0.95;
    let pass_b = h.ci.lo > a.ci.hi;
    let pass_c = b.mean > a.mean;
    verdict(
        "whoqol config ordering",
        pass_a && pass_b && pass_c && within(elapsed, 300),
        &format!(
            "(a) cover/ridge {:.3} [{:.3}, {:.3}]; (b) default {:.3} [{:.3}, {:.3}]; (c) two annuli {:.3}; {elapsed:.1?}",
            h.mean, h.ci.lo, h.ci.hi, a.mean, a.ci.lo, a.ci.hi, b.mean
        ),
    );
}

#[test]
fn iris_check() {
    let start = Instant::now();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/iris.csv");
    let iris = load_csv(&path, Task::Multiclass).unwrap();
    assert_eq!(iris.len(), 150);
    let settings = ExperimentSettings {
        ss: 50,
        split_ratio: 0.8,
        seed: 0,
        metrics: vec![MetricKind::Accuracy],
        ..ExperimentSettings::default()
    };
    let cfg = PolygridConfig {
        sector: SectorType::Cover,
        ..PolygridConfig::default()
    };
    let r = accuracy(&iris, &cfg, &settings);
    let elapsed = start.elapsed();
    verdict(
        "iris check",
        r.mean >= 0.80 && within(elapsed, 60),
        &format!("{} mean test accuracy {:.3} over 50 splits of 120/30; {elapsed:.1?}", cfg.tag(), r.mean),
    );
}

#[test]
fn cardinality_calibration() {
    let mut pass = true;
    let mut details = Vec::new();
    for inst in Instrument::ALL {
        let ds = synth_congeneric(&inst.spec(inst.default_rows()), 3).unwrap();
        for (n, target) in [(11, 1.08), (22, 4.54)] {
            for ranking in [false, true] {
                let spec = AssignmentSynthSpec::fuzzy(n, target, ranking, 17);
                let outcome = synth_assignment(&ds, &spec);
                let achieved = outcome
                    .as_ref()
                    .map(|(y, _)| assignment_stats(y, ds.n_domains()).cardinality)
                    .unwrap_or(f64::NAN);
                let ok = (achieved - target).abs() <= 0.02;
                pass &= ok;
                details.push(format!(
                    "{}-{}-{n}: {achieved:.3}",
                    inst.name(),
                    if ranking { "lr" } else { "ml" }
                ));
            }
        }
    }
    verdict("cardinality calibration", pass, &details.join(", "));
}

fn reduced_grid() -> Vec<PolygridConfig> {
    GridSpec {
        ns_per_domain: vec![1, 2],
        n_a: vec![1, 2],
        vorder: vec![VertexOrder::Averages, VertexOrder::Rho],
        annulus: vec![AnnulusType::SInvariant, AnnulusType::RInvariant],
        sector: vec![SectorType::Cover, SectorType::Miss],
        solver: vec![SolverKind::Lstsq, SolverKind::ridge()],
        cutoff: vec![CutoffScheme::Single],
    }
    .configs(&PolygridConfig::default())
}

#[test]
fn harness_sanity() {
    let start = Instant::now();
    let metrics = vec![MetricKind::Accuracy, MetricKind::HammingLoss, MetricKind::F1Micro];
    let settings = ExperimentSettings {
        ss: 20,
        seed: 3,
        metrics: metrics.clone(),
        ..ExperimentSettings::default()
    };
    let grid = reduced_grid();
    assert!(grid.len() <= 64);
    let mut results: Vec<RunResult> = Vec::new();
    let datasets: Vec<_> = Instrument::ALL
        .iter()
        .map(|&inst| instrument_dataset(inst, inst.default_rows(), 3).unwrap())
        .collect();
    for ds in &datasets {
        let search = grid_search(ds, &grid, &settings).unwrap();
        let best = search.best_config(MetricKind::Accuracy).unwrap().clone();
        for e in compare_models(ds, &best, &BaselineKind::ALL, &settings).unwrap() {
            results.extend(e.results);
        }
    }
    let mut pass = true;
    let mut details = Vec::new();
    for &m in &metrics {
        let (dom, _) = dominance_and_echelons(&results, m).unwrap();
        let r = dom.models.iter().position(|x| x == "Random").unwrap();
        let k = dom.models.len();
        let max = dom.datasets.len();
        let row_zero = dom.counts[r].iter().all(|&c| c == 0);
        let col_max = (0..k).filter(|&j| j != r).all(|j| dom.counts[j][r] == max);
        pass &= row_zero && col_max;
        details.push(format!(
            "{m}: random row {:?}, column {:?}",
            dom.counts[r],
            (0..k).map(|j| dom.counts[j][r]).collect::<Vec<_>>()
        ));
    }
    // three hand-built chains M1 > M2 > M3 on three datasets
    let mut chains = Vec::new();
    for (d, dataset) in ["a", "b", "c"].iter().enumerate() {
        for (j, model) in ["M1", "M2", "M3"].iter().enumerate() {
            let base = 0.9 - 0.2 * j as f64 - 0.01 * d as f64;
            let sample: Vec<f64> = (0..10).map(|i| base + 0.001 * (i % 3) as f64).collect();
            chains.push(RunResult::from_sample(dataset, model, "-", MetricKind::Accuracy, sample, 0.05));
        }
    }
    let (dom, ranking) = dominance_and_echelons(&chains, MetricKind::Accuracy).unwrap();
    let members: Vec<Vec<usize>> = ranking.echelons.iter().map(|e| e.members.clone()).collect();
    let chain_ok = members == vec![vec![0], vec![1], vec![2]]
        && echelons(&dom.counts, &ranking.average_ranks).len() == 3;
    pass &= chain_ok;
    details.push(format!("chain echelons {members:?}"));
    let elapsed = start.elapsed();
    pass &= within(elapsed, 600);
    verdict("harness sanity", pass, &format!("{}; {elapsed:.1?}", details.join("; ")));
}

#[test]
fn faithfulness_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let ds = instrument_dataset(Instrument::Ampiab, 300, 5).unwrap();
    let y = ds.assignment().unwrap();
    let multilabel = Assignment::multilabel(
        3,
        y.presence()
            .iter()
            .enumerate()
            .map(|(i, r)| vec![r[0], r[1] || i % 3 == 0, r[2]])
            .collect(),
    )
    .unwrap();
    let configs = [
        PolygridConfig::default(),
        PolygridConfig {
            n_a: 3,
            ns_per_domain: 2,
            sector: SectorType::Cover,
            solver: SolverKind::ridge(),
            ..PolygridConfig::default()
        },
        PolygridConfig {
            n_a: 2,
            solver: SolverKind::LstsqUni,
            cutoff: CutoffScheme::Multiple,
            ..PolygridConfig::default()
        },
        PolygridConfig {
            solver: SolverKind::LstsqSym,
            ..PolygridConfig::default()
        },
    ];
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut deterministic = true;
    let mut tags_match = true;
    for (c, cfg) in configs.iter().enumerate() {
        let target = if c % 2 == 0 { y } else { &multilabel };
        let inst = fit(&ds.x, target, cfg).unwrap();
        let rows: Vec<Vec<f64>> = (0..25).map(|_| ds.x[rng.random_range(0..ds.len())].clone()).collect();
        let preds = inst.predict_many(&rows).unwrap();
        let dm = build_diagram(&inst, &preds).unwrap();
        for (a, p) in preds.iter().enumerate() {
            for (col, &j) in dm.column_order.iter().enumerate() {
                let again = dm.recompute(a, col).unwrap();
                let tag = dm.chart_at(a + 1, col + 1).unwrap().tag.as_ref().unwrap().value;
                worst = worst.max((again - p.scores[j]).abs()).max((tag - p.scores[j]).abs());
                checked += 1;
            }
        }
        let svg = render_svg(&dm, &SvgStyle::default());
        deterministic &= svg == render_svg(&build_diagram(&inst, &preds).unwrap(), &SvgStyle::default());
        if inst.task == Task::Multilabel {
            let green = svg.matches("tag tag-green").count();
            let expected: usize = preds.iter().map(|p| p.labels.iter().filter(|&&l| l).count()).sum();
            tags_match &= green == expected;
        }
    }
    verdict(
        "faithfulness round-trip",
        checked >= 100 && worst < 1e-9 && deterministic && tags_match,
        &format!("{checked} tags recomputed, max error {worst:.2e}, svg deterministic {deterministic}, tag colors match {tags_match}"),
    );
}
