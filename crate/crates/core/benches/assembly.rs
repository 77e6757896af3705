use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fraclab::experiments::{sweep_mu, DomainSpec, SweepConfig};
use fraclab::{assemble_with, Alpha, Execution, Grid, TwoPatch};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn assembly(c: &mut Criterion) {
    let alpha = Alpha::new(0.5).unwrap();
    let mut group = c.benchmark_group("assemble");
    for h in [1.0 / 64.0, 1.0 / 128.0] {
        let grid = Grid::new(&TwoPatch::new(2.0, 2.0, 0.5).unwrap().domain(), h).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, grid.len()), &grid, |b, g| {
                b.iter(|| assemble_with(black_box(g), alpha, exec))
            });
        }
    }
    group.finish();
}

fn mu_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_mu");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut cfg = SweepConfig::new("bench", DomainSpec::TwoPatch { a1: 1.0, a2: 1.0 }, vec![0.5], vec![0.125, 0.25, 0.5, 1.0]);
        cfg.h = 1.0 / 32.0;
        cfg.parallel = exec.is_parallel();
        group.bench_function(name, |b| b.iter(|| sweep_mu(black_box(&cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, assembly, mu_sweep);
criterion_main!(benches);
