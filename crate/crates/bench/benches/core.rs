use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entsearch::copies::overlap_grid;
use entsearch::entdetect::SpectrumSampler;
use entsearch::{
    post_oracle_state, ppt_test, search, spa_test_exact, DensityOp, Mode, PureState, RangeOracle, RegisterLayout,
    Route, SearchConfig, SpaMap,
};
use entsearch_bench::{hard_cnf, noisy_bell, planted_instance};

fn counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("count_solutions");
    for n in [8, 12, 16] {
        let f = hard_cnf(n);
        let hi = f.space_size() - 1;
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| f.count_solutions(0, black_box(hi)).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle_apply");
    for n in [8, 12] {
        let f = hard_cnf(n);
        let layout = RegisterLayout::minimal(n).unwrap();
        let o = RangeOracle::full(&f, layout).unwrap();
        let psi = PureState::uniform_superposition(layout);
        g.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| b.iter(|| o.apply(psi).unwrap()));
    }
    g.finish();
}

fn detectors(c: &mut Criterion) {
    let spa = SpaMap::transpose(2).unwrap();
    let rho = noisy_bell(0.3);
    c.bench_function("ppt/bell", |b| b.iter(|| ppt_test(black_box(&rho)).unwrap()));
    c.bench_function("spa_exact/bell", |b| b.iter(|| spa_test_exact(black_box(&rho), &spa).unwrap()));

    let f = hard_cnf(6);
    let psi = post_oracle_state(&f, 0, 31, RegisterLayout::minimal(6).unwrap()).unwrap();
    let big = DensityOp::from_state(&psi).unwrap();
    c.bench_function("ppt/n6-minimal", |b| b.iter(|| ppt_test(black_box(&big)).unwrap()));

    let sampler = SpectrumSampler::from_spectrum(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    c.bench_function("estimate/N=2^14", |b| b.iter(|| sampler.estimate(1 << 14, black_box(7))));
}

fn searching(c: &mut Criterion) {
    let mut g = c.benchmark_group("search");
    for n in [8, 12, 16] {
        let (f, _) = planted_instance(n);
        let cfg = SearchConfig::new(Route::Analytic);
        g.bench_with_input(BenchmarkId::new("analytic", n), &f, |b, f| b.iter(|| search(f, &cfg).unwrap()));
    }
    let (f, _) = planted_instance(6);
    let cfg = SearchConfig::new(Route::Ppt).with_mode(Mode::Minimal);
    g.bench_function("ppt/6", |b| b.iter(|| search(&f, &cfg).unwrap()));
    g.finish();
}

fn grid(c: &mut Criterion) {
    c.bench_function("grid/64x64", |b| b.iter(|| overlap_grid((2, 1 << 30), (2, 1 << 30), 64).unwrap()));
}

criterion_group!(benches, counting, oracle, detectors, searching, grid);
criterion_main!(benches);
