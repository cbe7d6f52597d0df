use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heisenberg::{
    find_characteristic_points, orientability_verdict, AxisBox, Execution, FrameIndex,
    LevelSetSurface, Mode, ParametrizedPatch, Polynomial, SearchOptions, Surface, VerdictOptions,
};

const PATHS: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn patch_search(c: &mut Criterion) {
    let surface = Surface::Patch(ParametrizedPatch::mobius(0.2, 0.1).unwrap());
    let mut group = c.benchmark_group("mobius_characteristic_720x160");
    group.sample_size(20);
    for (name, execution) in PATHS {
        let opts = SearchOptions {
            execution,
            ..SearchOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| find_characteristic_points(&surface, &opts).unwrap())
        });
    }
    group.finish();
}

fn verdict(c: &mut Criterion) {
    let patch = ParametrizedPatch::mobius(0.5, 0.2).unwrap();
    let mut group = c.benchmark_group("mobius_heisenberg_verdict_720x160");
    group.sample_size(10);
    for (name, execution) in PATHS {
        let opts = VerdictOptions {
            execution,
            ..VerdictOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| orientability_verdict(&patch, Mode::Heisenberg, &opts).unwrap())
        });
    }
    group.finish();
}

fn levelset_search(c: &mut Criterion) {
    let f = Polynomial::coordinate(1, FrameIndex::T);
    let surface = Surface::LevelSet(
        LevelSetSurface::new(f.into(), AxisBox::cube(1, 1.0).unwrap()).unwrap(),
    );
    let mut group = c.benchmark_group("plane_t_levelset_scan");
    group.sample_size(10);
    for (name, execution) in PATHS {
        let opts = SearchOptions {
            grid: (64, 64),
            execution,
            ..SearchOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| find_characteristic_points(&surface, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, patch_search, verdict, levelset_search);
criterion_main!(benches);
