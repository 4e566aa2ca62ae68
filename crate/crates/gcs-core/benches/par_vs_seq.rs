//! Rayon path against its sequential twin on the three hot loops: epoch
//! planning, request coalescing, and workload construction. `--features ""`
//! builds collapse both sides to the fallback, which is how to check the
//! feature gate costs nothing when it is off.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use gcs_core::gather::{coalesce_trace_seq, coalesce_trace_with, plan_offsets, SectorPolicy};
use gcs_core::graph::{attach_features, generate_graph, DegreeModel, Fill, NodeId, Placement};
use gcs_core::pipeline::{build_workload, build_workload_seq, PipelineConfig};
use gcs_core::sampler::{epoch_plans, epoch_plans_seq};

fn bench_epoch_plans(c: &mut Criterion) {
    let graph = generate_graph(20_000, 10, DegreeModel::Uniform, 7).unwrap();
    let mut group = c.benchmark_group("epoch_plans");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| epoch_plans(&graph, 500, &[5, 10], 1).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| epoch_plans_seq(&graph, 500, &[5, 10], 1).unwrap())
    });
    group.finish();
}

fn bench_coalesce(c: &mut Criterion) {
    // 96-wide rows keep every warp misaligned, the costlier case.
    let table =
        attach_features(100_000, 96, 4, 0, Placement::HostMapped, Fill::None, u64::MAX).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    let rows: Vec<NodeId> = (0..40_000).map(|_| rng.gen_range(0..100_000)).collect();
    let pairs = plan_offsets(&rows, 96, 32);

    let mut group = c.benchmark_group("coalesce_trace");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| coalesce_trace_with(&table, &pairs, SectorPolicy::SpanMinMax))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| coalesce_trace_seq(&table, &pairs, SectorPolicy::SpanMinMax))
    });
    group.finish();
}

fn bench_build_workload(c: &mut Criterion) {
    let graph = generate_graph(20_000, 10, DegreeModel::Uniform, 7).unwrap();
    let table =
        attach_features(20_000, 128, 4, 0, Placement::HostMapped, Fill::None, u64::MAX).unwrap();
    let config = PipelineConfig {
        batch_size: 500,
        fanouts: vec![5, 10],
        ..PipelineConfig::default()
    };

    let mut group = c.benchmark_group("build_workload");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| build_workload(&graph, &table, &config, 1).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| build_workload_seq(&graph, &table, &config, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_epoch_plans, bench_coalesce, bench_build_workload);
criterion_main!(benches);
