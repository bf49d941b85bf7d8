use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dickesep::volume::{ppt_gds_volume_with, sds_volume_mc_with};
use dickesep::Execution;

fn bench_ppt_volume(c: &mut Criterion) {
    let mut group = c.benchmark_group("ppt_gds_volume_n4");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| ppt_gds_volume_with(exec, 4, 1 << 17, 1).unwrap())
        });
    }
    group.finish();
}

fn bench_sds_volume(c: &mut Criterion) {
    let mut group = c.benchmark_group("sds_volume_mc_n4");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| sds_volume_mc_with(exec, 4, 1 << 18, 1))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_ppt_volume, bench_sds_volume);
criterion_main!(benches);
