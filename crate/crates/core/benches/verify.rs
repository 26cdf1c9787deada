use calbund_core::catalog;
use calbund_core::constructions::{
    sample_points, verify, ConstructionKind, SampleGrid, VerifyConfig,
};
use calbund_core::exec::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn verify_exec(c: &mut Criterion) {
    let imm = catalog::lookup_ref("catenoid").unwrap().immersion;
    let mut group = c.benchmark_group("verify_cayley_plus");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let cfg = VerifyConfig {
            exec,
            ..VerifyConfig::default()
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &cfg,
            |b, cfg| b.iter(|| verify(&imm, ConstructionKind::CayleyPlus, cfg).unwrap()),
        );
    }
    group.finish();
}

fn sample_exec(c: &mut Criterion) {
    let imm = catalog::lookup_ref("holomorphic_expz").unwrap().immersion;
    let mut group = c.benchmark_group("sample_associative");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let grid = SampleGrid {
            exec,
            ..SampleGrid::default()
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &grid,
            |b, grid| b.iter(|| sample_points(&imm, ConstructionKind::AssociativeE, grid).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, verify_exec, sample_exec);
criterion_main!(benches);
