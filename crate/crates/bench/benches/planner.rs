use std::sync::Arc;

use coadapt_bench::{shared_autonomy, table_carrying};
use coadapt_core::game::Belief;
use coadapt_core::harness::{run_population, PopulationConfig};
use coadapt_core::planner::{brute_force_value, solve_exact, SolveOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_exact");
    for t in [6, 10, 14] {
        let m = shared_autonomy(t);
        let b0 = Belief::uniform(m.types().len());
        g.bench_with_input(BenchmarkId::new("shared-autonomy", t), &m, |b, m| {
            b.iter(|| solve_exact(m, m.start(), &b0).unwrap())
        });
    }
    for t in [6, 10] {
        let m = table_carrying(t);
        let b0 = Belief::uniform(m.types().len());
        g.bench_with_input(BenchmarkId::new("table-carrying", t), &m, |b, m| {
            b.iter(|| solve_exact(m, m.start(), &b0).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let m = shared_autonomy(4);
    let b0 = vec![0.2; 5];
    c.bench_function("brute_force_value/shared-autonomy/4", |b| {
        b.iter(|| brute_force_value(&m, m.start(), &b0, 4).unwrap())
    });
}

fn population(c: &mut Criterion) {
    let m = Arc::new(shared_autonomy(10));
    let cfg = PopulationConfig { episodes: 200, write_traces: false, ..Default::default() };
    let mut g = c.benchmark_group("run_population");
    g.sample_size(10);
    g.bench_function("shared-autonomy/200", |b| {
        b.iter(|| run_population(&m, &cfg, 1, SolveOptions::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, exact, oracle, population);
criterion_main!(benches);
