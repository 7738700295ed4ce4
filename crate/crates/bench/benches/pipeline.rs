use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use polygrid::data::{instrument_dataset, Instrument};
use polygrid::diagram::{build_diagram, render_svg, SvgStyle};
use polygrid::geometry::{AnnulusType, DiscPartition, PartitionSpec, RootsOfUnity, SectorType, DEFAULT_ARC_RESOLUTION};
use polygrid::model::{fit_dataset, PolygridConfig};
use polygrid::solvers::SolverKind;

fn config(n_a: usize) -> PolygridConfig {
    PolygridConfig {
        ns_per_domain: 2,
        n_a,
        sector: SectorType::Cover,
        solver: SolverKind::Ridge { lambda: 1.0 },
        ..PolygridConfig::default()
    }
}

fn coverage(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage");
    let scores = [0.9, 0.4, 0.7, 0.55, 0.8, 0.3];
    let roots = RootsOfUnity::new(scores.len()).unwrap();
    let polygon = roots.polygon(&scores);
    for n_a in [1, 2, 4] {
        let partition = DiscPartition::new(
            scores.len(),
            &PartitionSpec {
                n_a,
                n_s: 2 * scores.len(),
                annulus: AnnulusType::SInvariant,
                sector: SectorType::Cover,
                tree_radii: None,
                arc_resolution: DEFAULT_ARC_RESOLUTION,
            },
        )
        .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n_a), &partition, |b, p| {
            b.iter(|| p.coverage(black_box(&polygon)))
        });
    }
    group.finish();
}

fn fit_and_predict(c: &mut Criterion) {
    let ds = instrument_dataset(Instrument::Ampiab, 510, 1).unwrap();
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    for n_a in [1, 2] {
        group.bench_with_input(BenchmarkId::from_parameter(n_a), &config(n_a), |b, cfg| {
            b.iter(|| fit_dataset(black_box(&ds), cfg).unwrap())
        });
    }
    group.finish();

    let inst = fit_dataset(&ds, &config(2)).unwrap();
    c.bench_function("predict_row", |b| b.iter(|| inst.predict(black_box(&ds.x[0])).unwrap()));
}

fn diagram(c: &mut Criterion) {
    let ds = instrument_dataset(Instrument::Whoqol, 100, 1).unwrap();
    let inst = fit_dataset(&ds, &config(2)).unwrap();
    let preds = inst.predict_many(&ds.x[..3]).unwrap();
    c.bench_function("diagram_svg", |b| {
        b.iter(|| {
            let dm = build_diagram(&inst, black_box(&preds)).unwrap();
            render_svg(&dm, &SvgStyle::default())
        })
    });
}

criterion_group!(benches, coverage, fit_and_predict, diagram);
criterion_main!(benches);
