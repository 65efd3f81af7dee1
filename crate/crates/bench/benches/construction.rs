use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use radial_tree::*;

fn window_for(points: f64) -> f64 {
    (points / std::f64::consts::PI).sqrt()
}

fn rst_builders(c: &mut Criterion) {
    let mut g = c.benchmark_group("rst_build");
    for n in [500.0, 2000.0, 10_000.0] {
        let ps = sample_palm_ppp(1.0, window_for(n), 1).unwrap();
        g.bench_with_input(BenchmarkId::new("indexed", n), &ps, |b, ps| {
            b.iter(|| build_rst_indexed(ps))
        });
        if n <= 2000.0 {
            g.bench_with_input(BenchmarkId::new("naive", n), &ps, |b, ps| {
                b.iter(|| build_rst_naive(ps))
            });
        }
    }
    g.finish();
}

fn checks(c: &mut Criterion) {
    let ps = sample_palm_ppp(1.0, window_for(10_000.0), 2).unwrap();
    let t = build_rst_indexed(&ps);
    c.bench_function("noncrossing_10k", |b| b.iter(|| check_noncrossing(&t)));
    c.bench_function("dsf_10k", |b| b.iter(|| build_dsf(&ps)));
}

fn replicate(c: &mut Criterion) {
    let mut g = c.benchmark_group("replicate");
    g.sample_size(10);
    let cfg = MonteCarloConfig::for_window(1, 1.0, 60.0);
    g.bench_function("window_60", |b| {
        b.iter_batched(
            || cfg.clone(),
            |cfg| radial_tree::montecarlo::run_replicate(&cfg, 0).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, rst_builders, checks, replicate);
criterion_main!(benches);
