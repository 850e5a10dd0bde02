use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use krylov_core::catalog::default_system;
use krylov_core::dynamics::{krylov_profile, linspace};
use krylov_core::moments::moments_theorem1;
use krylov_core::operator_space::{build_energy_rep, build_position_pair, Frame, InnerProduct, InnerProductKind};
use krylov_core::verification::full_chain;
use krylov_core::{Execution, Mode, SystemKind};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn profile_grid(c: &mut Criterion) {
    let mode = Mode::bigreal(50).unwrap();
    let grid = linspace(&mode.zero(), &mode.int(10), 32);
    let mut group = c.benchmark_group("profile_grid");
    group.sample_size(10);

    let spec = default_system(SystemKind::QRacah, mode).unwrap();
    let rep = build_position_pair(&spec, Frame::Symmetric).unwrap();
    let ip = InnerProduct::for_representation(InnerProductKind::Trace, &rep).unwrap();
    let chain = full_chain(&ip, &rep).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("q_racah", name), &exec, |b, &exec| {
            b.iter(|| krylov_profile(&chain, &rep.h, &ip, &grid, exec).unwrap())
        });
    }

    let spec = default_system(SystemKind::Gegenbauer, mode).unwrap();
    let rep = build_energy_rep(&spec, 30, Frame::Symmetric).unwrap();
    let ip = InnerProduct::for_representation(InnerProductKind::Wightman { beta: mode.one() }, &rep).unwrap();
    let chain = full_chain(&ip, &rep).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("gegenbauer", name), &exec, |b, &exec| {
            b.iter(|| krylov_profile(&chain, &rep.h, &ip, &grid, exec).unwrap())
        });
    }
    group.finish();
}

fn moment_sweep(c: &mut Criterion) {
    let specs: Vec<_> = SystemKind::FINITE
        .iter()
        .map(|&k| default_system(k, Mode::Exact).unwrap())
        .collect();
    let mut group = c.benchmark_group("theorem1_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| exec.map(specs.clone(), |s| moments_theorem1(&s, 6).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, profile_grid, moment_sweep);
criterion_main!(benches);
