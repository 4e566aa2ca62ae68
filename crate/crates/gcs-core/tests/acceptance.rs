//! Acceptance gate. Each test checks one shipped behavioral guarantee and
//! prints a `criterion N PASS` line with the measured values (visible under
//! `--nocapture`), and enforces its own wall-time budget.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gcs_core::fixtures::{calibrated, CalibratedFixture, EPOCH_SEED};
use gcs_core::gather::{
    apply_circular_shift, coalesce_trace, plan_offsets, reference_gather, OffsetPair,
};
use gcs_core::graph::{
    attach_features, generate_graph, CsrGraph, DegreeModel, FeatureTable, Fill, Placement,
};
use gcs_core::link::{
    cpu_gather_time, dma_transfer_time, provisioning_bounds, uvm_migration_time,
    zero_copy_bandwidth, GpuSpec, LinkParams, DEFAULT_WIRE_BANDWIDTH,
};
use gcs_core::pipeline::{
    build_workload, feature_dim_sweep, resource_sweep, simulate_epoch_on, PipelineConfig,
    SimReport, Strategy, TrainModel, Workload, ALL_STRATEGIES,
};
use gcs_core::sampler::{minibatch_stream_with, SampleOptions};

struct Shared {
    fixture: CalibratedFixture,
    workload: Workload,
}

fn shared() -> &'static Shared {
    static SHARED: OnceLock<Shared> = OnceLock::new();
    SHARED.get_or_init(|| {
        let fixture = calibrated().expect("calibrated fixture");
        let workload = build_workload(
            &fixture.graph,
            &fixture.table,
            &fixture.config,
            EPOCH_SEED,
        )
        .expect("fixture workload");
        Shared { fixture, workload }
    })
}

fn within_budget(start: Instant, budget: Duration, label: &str) {
    let elapsed = start.elapsed();
    assert!(
        elapsed <= budget,
        "{label} took {elapsed:?}, budget {budget:?}"
    );
}

fn host_table(num_nodes: u64, feat_dim: u64, base_offset: u64, fill: Fill) -> FeatureTable {
    attach_features(
        num_nodes,
        feat_dim,
        4,
        base_offset,
        Placement::HostMapped,
        fill,
        u64::MAX,
    )
    .unwrap()
}

#[test]
fn criterion_01_single_row_shift_request_counts() {
    let start = Instant::now();
    let table = host_table(2, 120, 0, Fill::None);
    let pairs = plan_offsets(&[1], 120, 32);
    let plain = coalesce_trace(&table, &pairs);
    let shifted = coalesce_trace(&table, &apply_circular_shift(&pairs, 120, 32));
    assert_eq!(plain.requests.len(), 8, "unshifted request count");
    assert_eq!(shifted.requests.len(), 5, "shifted request count");
    within_budget(start, Duration::from_secs(1), "criterion 1");
    println!(
        "criterion 1 PASS: 480 B row gather issues {} requests unshifted, {} shifted",
        plain.requests.len(),
        shifted.requests.len()
    );
}

/// Independent coalescing oracle: mark every 32-byte sector each warp's
/// loads touch, then per 128-byte line emit one request spanning the lowest
/// to the highest touched sector.
fn sector_oracle(table: &FeatureTable, pairs: &[OffsetPair]) -> Vec<(u64, u32)> {
    let elem = table.elem_size() as u64;
    let mut out = Vec::new();
    for warp in pairs.chunk_by(|a, b| a.warp_id == b.warp_id) {
        let mut sectors: Vec<u64> = Vec::with_capacity(warp.len() * 2);
        for p in warp {
            let lo = table.element_address(p.src_offset);
            let hi = lo + elem - 1;
            for s in lo / 32..=hi / 32 {
                sectors.push(s);
            }
        }
        sectors.sort_unstable();
        sectors.dedup();
        let mut i = 0;
        while i < sectors.len() {
            let line = sectors[i] / 4;
            let mut j = i;
            while j + 1 < sectors.len() && sectors[j + 1] / 4 == line {
                j += 1;
            }
            let span = sectors[j] - sectors[i] + 1;
            out.push((sectors[i] * 32, (span * 32) as u32));
            i = j + 1;
        }
    }
    out
}

#[test]
fn criterion_02_coalescer_matches_sector_enumeration_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c0a_1e5c);
    let cases = 10_000;
    let mut total_requests = 0u64;
    for case in 0..cases {
        let feat_dim = rng.gen_range(1..=1200u64);
        let base = rng.gen_range(0..128u64);
        let rows = rng.gen_range(1..=64usize);
        let idx: Vec<u64> = (0..rows).map(|_| rng.gen_range(0..1000)).collect();
        let table = host_table(1000, feat_dim, base, Fill::None);
        let mut pairs = plan_offsets(&idx, feat_dim, 32);
        if case % 2 == 1 {
            pairs = apply_circular_shift(&pairs, feat_dim, 32);
        }
        let trace = coalesce_trace(&table, &pairs);
        let got: Vec<(u64, u32)> = trace
            .requests
            .iter()
            .map(|r| (r.start_address, r.payload_bytes))
            .collect();
        let want = sector_oracle(&table, &pairs);
        assert_eq!(
            got, want,
            "case {case}: dim {feat_dim} base {base} rows {rows}"
        );
        total_requests += got.len() as u64;
    }
    within_budget(start, Duration::from_secs(30), "criterion 2");
    println!(
        "criterion 2 PASS: {cases} randomized plans, {total_requests} requests, all equal to the sector oracle"
    );
}

#[test]
fn criterion_03_shift_preserves_gather_results() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a_11_6e_44);
    let cases = 10_000;
    let mut identity_cases = 0;
    for case in 0..cases {
        let feat_dim = match case % 3 {
            // Dimensions where the shift must be the identity.
            0 => {
                if rng.gen_bool(0.5) {
                    rng.gen_range(1..=32u64)
                } else {
                    32 * rng.gen_range(1..=37u64)
                }
            }
            _ => rng.gen_range(1..=1200u64),
        };
        let nodes = rng.gen_range(1..=64u64);
        let rows = rng.gen_range(1..=32usize);
        let idx: Vec<u64> = (0..rows).map(|_| rng.gen_range(0..nodes)).collect();
        let table = host_table(nodes, feat_dim, 0, Fill::Sequential);
        let pairs = plan_offsets(&idx, feat_dim, 32);
        let shifted = apply_circular_shift(&pairs, feat_dim, 32);
        let plain_out = reference_gather(&table, &pairs).unwrap();
        let shifted_out = reference_gather(&table, &shifted).unwrap();
        assert_eq!(plain_out, shifted_out, "case {case}: dim {feat_dim}");
        if feat_dim <= 32 || feat_dim % 32 == 0 {
            assert_eq!(shifted, pairs, "case {case}: dim {feat_dim} not identity");
            identity_cases += 1;
        }
    }
    assert!(identity_cases >= cases / 4);
    within_budget(start, Duration::from_secs(30), "criterion 3");
    println!(
        "criterion 3 PASS: {cases} randomized gathers unchanged by the shift ({identity_cases} identity cases)"
    );
}

#[test]
fn criterion_04_provisioning_arithmetic_on_defaults() {
    let start = Instant::now();
    let bounds = provisioning_bounds(
        DEFAULT_WIRE_BANDWIDTH,
        128.0,
        &LinkParams::default(),
        &GpuSpec::default(),
    );
    assert!(
        (bounds.upper_fraction - 0.195).abs() <= 0.001,
        "upper {}",
        bounds.upper_fraction
    );
    assert!(
        (bounds.lower_fraction - 0.082).abs() <= 0.002,
        "lower {}",
        bounds.lower_fraction
    );
    assert!(
        (bounds.required_outstanding - 324.6).abs() <= 0.5,
        "required {}",
        bounds.required_outstanding
    );
    within_budget(start, Duration::from_secs(1), "criterion 4");
    println!(
        "criterion 4 PASS: upper {:.4}, lower {:.4}, required outstanding {:.1}",
        bounds.upper_fraction, bounds.lower_fraction, bounds.required_outstanding
    );
}

#[test]
fn criterion_05_alignment_sweep_efficiency_bands() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa119);
    let rows: Vec<u64> = (0..2048).map(|_| rng.gen_range(0..100_000u64)).collect();
    let link = LinkParams::default();
    let warps = GpuSpec::default().total_warps();
    let mut lines = Vec::new();
    for size in (1024..=1044u64).step_by(4) {
        let dim = size / 4;
        let table = host_table(100_000, dim, 0, Fill::None);
        let pairs = plan_offsets(&rows, dim, 32);
        let eff = |p: &[OffsetPair]| {
            let hist = coalesce_trace(&table, p).payload_histogram();
            zero_copy_bandwidth(&hist, &link, warps).efficiency
        };
        let plain = eff(&pairs);
        let shifted = eff(&apply_circular_shift(&pairs, dim, 32));
        assert!(
            shifted >= plain - 1e-12,
            "size {size}: shifted {shifted} below unshifted {plain}"
        );
        if size % 128 == 0 {
            assert!((shifted - plain).abs() < 1e-12, "size {size} should tie");
        } else {
            assert!(
                (0.70..=0.87).contains(&plain),
                "size {size}: unshifted {plain}"
            );
            assert!(
                (0.85..=0.95).contains(&shifted),
                "size {size}: shifted {shifted}"
            );
        }
        lines.push(format!("{size} B: {plain:.3} vs {shifted:.3}"));
    }
    within_budget(start, Duration::from_secs(10), "criterion 5");
    println!(
        "criterion 5 PASS: unshifted vs shifted efficiency {}",
        lines.join(", ")
    );
}

#[test]
fn criterion_06_resource_fraction_sweep_shape() {
    let start = Instant::now();
    let s = shared();
    let xs = [0.025, 0.05, 0.10, 0.15, 0.20, 0.25];
    let points = resource_sweep(&s.fixture.graph, &s.fixture.table, &s.fixture.config, &xs, EPOCH_SEED)
        .unwrap();
    let bw = |x: f64| {
        points
            .iter()
            .find(|p| p.resource_fraction == x)
            .unwrap()
            .gather_bandwidth
    };
    assert!(
        bw(0.025) < 0.45 * bw(0.25),
        "starved producer too fast: {} vs {}",
        bw(0.025),
        bw(0.25)
    );
    assert!(
        (bw(0.15) - bw(0.25)).abs() < 0.05 * bw(0.25),
        "no saturation: {} vs {}",
        bw(0.15),
        bw(0.25)
    );
    let best = points
        .iter()
        .min_by(|a, b| a.epoch_seconds.total_cmp(&b.epoch_seconds))
        .unwrap();
    assert_eq!(best.resource_fraction, 0.10, "argmin {:?}", best);
    within_budget(start, Duration::from_secs(30), "criterion 6");
    println!(
        "criterion 6 PASS: bandwidth {:.2e} at X=0.025 vs {:.2e} at X=0.25, epoch argmin at X={}",
        bw(0.025),
        bw(0.25),
        best.resource_fraction
    );
}

fn fixture_epoch(s: &Shared, strategy: Strategy, num_gpus: u32) -> SimReport {
    let cfg = PipelineConfig {
        strategy,
        num_gpus,
        ..s.fixture.config.clone()
    };
    simulate_epoch_on(&s.workload, &s.fixture.table, &cfg).unwrap()
}

#[test]
fn criterion_07_strategy_comparison_ratios() {
    let start = Instant::now();
    let s = shared();
    let dma1 = fixture_epoch(s, Strategy::Dma, 1).epoch_seconds;
    let dma2 = fixture_epoch(s, Strategy::Dma, 2).epoch_seconds;
    let opt1 = fixture_epoch(s, Strategy::ZeroCopyOpt, 1).epoch_seconds;
    let opt2 = fixture_epoch(s, Strategy::ZeroCopyOpt, 2).epoch_seconds;
    let naive1 = fixture_epoch(s, Strategy::ZeroCopyNaive, 1).epoch_seconds;
    let single = dma1 / opt1;
    let dual = dma2 / opt2;
    let scaling = dma1 / dma2;
    assert!(
        (1.10..=1.55).contains(&single),
        "1-GPU speedup over dma: {single}"
    );
    assert!(
        (1.50..=2.10).contains(&dual),
        "2-GPU speedup over dma: {dual}"
    );
    assert!(
        (1.10..=1.40).contains(&scaling),
        "dma 2-GPU scaling: {scaling}"
    );
    assert!(
        naive1 >= dma1,
        "whole-GPU zero-copy should not beat dma: {naive1} vs {dma1}"
    );
    within_budget(start, Duration::from_secs(120), "criterion 7");
    println!(
        "criterion 7 PASS: speedups {single:.3} (1 GPU), {dual:.3} (2 GPU), dma scaling {scaling:.3}, naive/dma {:.3}",
        dma1 / naive1
    );
}

#[test]
fn criterion_08_feature_dim_sweep_speedups() {
    let start = Instant::now();
    let s = shared();
    let cfg = PipelineConfig {
        num_gpus: 2,
        ..s.fixture.config.clone()
    };
    let dims = [128u64, 256, 512, 1024, 2048, 4096];
    let points =
        feature_dim_sweep(&s.fixture.graph, &s.fixture.table, &cfg, &dims, EPOCH_SEED).unwrap();
    for w in points.windows(2) {
        assert!(
            w[1].speedup >= w[0].speedup - 1e-9,
            "speedup dropped between {} and {}: {} vs {}",
            w[0].feat_dim,
            w[1].feat_dim,
            w[0].speedup,
            w[1].speedup
        );
    }
    let last = points.last().unwrap();
    assert!(
        (2.2..=3.2).contains(&last.speedup),
        "speedup at 4096: {}",
        last.speedup
    );
    within_budget(start, Duration::from_secs(60), "criterion 8");
    let shape: Vec<String> = points
        .iter()
        .map(|p| format!("{}:{:.2}", p.feat_dim, p.speedup))
        .collect();
    println!("criterion 8 PASS: speedup by dim {}", shape.join(" "));
}

struct RandomCase {
    graph: CsrGraph,
    table: FeatureTable,
    config: PipelineConfig,
    seed: u64,
}

fn random_case(rng: &mut ChaCha8Rng, strategy: Strategy) -> RandomCase {
    let n = rng.gen_range(50..=400u64);
    let d = rng.gen_range(2..=8u64);
    let model = if rng.gen_bool(0.5) {
        DegreeModel::Uniform
    } else {
        DegreeModel::PowerLaw
    };
    let graph = generate_graph(n, d, model, rng.gen()).unwrap();
    let dim = rng.gen_range(16..=256u64);
    let base = [0u64, 4, 64][rng.gen_range(0..3)];
    let table = host_table(n, dim, base, Fill::None);
    let num_gpus = rng.gen_range(1..=3u32);
    let fanouts = if rng.gen_bool(0.5) {
        vec![rng.gen_range(2..=6usize)]
    } else {
        vec![rng.gen_range(2..=6usize), rng.gen_range(2..=6usize)]
    };
    let config = PipelineConfig {
        strategy,
        num_gpus,
        resource_fraction: rng.gen_range(0.05..0.5),
        pingpong_depth: rng.gen_range(1..=3u32),
        batch_size: rng.gen_range(10..=n),
        fanouts,
        train: TrainModel {
            base_per_minibatch: rng.gen_range(1e-4..5e-3),
            ..TrainModel::default()
        },
        aggregate_link_cap: if rng.gen_bool(0.5) {
            LinkParams::default().wire_bandwidth
        } else {
            gcs_core::pipeline::DEFAULT_AGGREGATE_LINK_CAP
        },
        weak_scaling: rng.gen_bool(0.1),
        histogram_sample_rows: 256,
        ..PipelineConfig::default()
    };
    RandomCase {
        graph,
        table,
        config,
        seed: rng.gen(),
    }
}

fn check_invariants(case: &RandomCase, workload: &Workload, report: &SimReport) {
    let cfg = &case.config;
    let stride = case.table.row_stride_bytes();
    let share_link = LinkParams {
        wire_bandwidth: cfg
            .link
            .wire_bandwidth
            .min(cfg.aggregate_link_cap / cfg.num_gpus as f64),
        ..cfg.link
    };
    let serialize = matches!(cfg.strategy, Strategy::ZeroCopyNaive | Strategy::Uvm);
    let mut epoch = 0.0f64;
    for tl in &report.per_gpu {
        let ms = &tl.minibatches;
        for m in ms {
            // Causality: sample, then produce, then consume.
            assert!(m.sampler.end <= m.producer.start + 1e-15);
            assert!(m.producer.end <= m.consumer.start + 1e-15);
            // Contention conservation: every stage is charged at the
            // equal-share rates; no GPU exceeds its link share.
            let stats = workload.stats()[m.minibatch];
            let bytes = stats.unique_nodes * stride;
            match cfg.strategy {
                Strategy::Dma => {
                    assert_eq!(
                        m.gather_seconds,
                        cpu_gather_time(
                            bytes,
                            cfg.host.mem_bandwidth,
                            cfg.host.gather_efficiency,
                            cfg.num_gpus,
                            cfg.host.worker_share_cap,
                        )
                    );
                    assert_eq!(m.transfer_seconds, dma_transfer_time(bytes, &share_link));
                }
                Strategy::Uvm => {
                    assert_eq!(
                        m.transfer_seconds,
                        uvm_migration_time(
                            stats.touched_pages,
                            cfg.uvm.page_size,
                            cfg.uvm.fault_latency,
                            share_link.wire_bandwidth,
                        )
                    );
                }
                Strategy::ZeroCopyNaive | Strategy::ZeroCopyOpt => {
                    assert_eq!(
                        m.transfer_seconds,
                        dma_transfer_time(stats.unique_nodes * 8, &share_link)
                    );
                    if bytes > 0 {
                        assert_eq!(m.gather_seconds, bytes as f64 / report.gather_bandwidth);
                    }
                }
                Strategy::CpuOnly => assert_eq!(m.transfer_seconds, 0.0),
                Strategy::AllInGpu => {
                    assert_eq!(m.gather_seconds, 0.0);
                    assert_eq!(m.transfer_seconds, 0.0);
                }
            }
        }
        // Ping-pong bound: at any producer completion, at most `depth`
        // minibatches are produced but not yet consumed.
        for (i, m) in ms.iter().enumerate() {
            let t = m.producer.end;
            let in_flight = ms[..=i]
                .iter()
                .filter(|x| x.producer.end <= t && x.consumer.end > t)
                .count();
            assert!(
                in_flight <= cfg.pingpong_depth as usize,
                "{in_flight} minibatches in flight at depth {}",
                cfg.pingpong_depth
            );
        }
        if serialize {
            for a in ms {
                for b in ms {
                    assert!(
                        !a.producer.overlaps(&b.consumer),
                        "producer/consumer overlap under a serializing strategy"
                    );
                }
            }
        }
        if let Some(last) = ms.last() {
            epoch = epoch.max(last.consumer.end);
        }
    }
    assert_eq!(report.epoch_seconds, epoch);
}

#[test]
fn criterion_09_pipeline_invariant_battery() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x91_92_93);
    let configs = 110;
    for i in 0..configs {
        let case = random_case(&mut rng, ALL_STRATEGIES[i % ALL_STRATEGIES.len()]);
        let w1 = build_workload(&case.graph, &case.table, &case.config, case.seed).unwrap();
        let w2 = build_workload(&case.graph, &case.table, &case.config, case.seed).unwrap();
        assert_eq!(w1.stats(), w2.stats(), "workload determinism, case {i}");
        let r1 = simulate_epoch_on(&w1, &case.table, &case.config).unwrap();
        let r2 = simulate_epoch_on(&w2, &case.table, &case.config).unwrap();
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap(),
            "report determinism, case {i}"
        );
        check_invariants(&case, &w1, &r1);
    }

    // Dominance chain on transfer-heavy pipelined configurations: resident
    // features beat partitioned zero-copy, which beats whole-GPU serialized
    // zero-copy. The chain needs real pipelining to exist: at least two
    // staging buffers (one buffer serializes every strategy, and then the
    // partitioned producer pays train inflation with no overlap to win
    // back) and enough minibatches per GPU to amortize pipeline fill.
    let dominance_configs = 100;
    for i in 0..dominance_configs {
        let n = 20 * rng.gen_range(5..=20u64);
        let graph = generate_graph(n, rng.gen_range(3..=10u64), DegreeModel::Uniform, rng.gen())
            .unwrap();
        let dim = 32 * rng.gen_range(1..=16u64);
        let table = host_table(n, dim, 0, Fill::None);
        let mut config = PipelineConfig {
            strategy: Strategy::ZeroCopyNaive,
            num_gpus: rng.gen_range(1..=3u32),
            resource_fraction: rng.gen_range(0.10..=0.20),
            pingpong_depth: rng.gen_range(2..=3u32),
            batch_size: n / 20,
            fanouts: vec![rng.gen_range(2..=8usize), rng.gen_range(2..=8usize)],
            sampler_seconds_per_node: rng.gen_range(0.0..2e-8),
            histogram_sample_rows: 256,
            ..PipelineConfig::default()
        };
        let seed = rng.gen();
        let workload = build_workload(&graph, &table, &config, seed).unwrap();
        let naive_probe = simulate_epoch_on(&workload, &table, &config).unwrap();
        let min_producer = naive_probe
            .per_gpu
            .iter()
            .flat_map(|tl| tl.minibatches.iter())
            .map(|m| m.gather_seconds + m.transfer_seconds)
            .fold(f64::INFINITY, f64::min);
        config.train.base_per_minibatch = min_producer * rng.gen_range(1.0..=3.0);
        // Transfer-heavy scope: keep sampling well under the producer, else
        // a sampler-paced pipeline hides naive's serialization for free
        // while the partitioned strategy still pays its train inflation.
        let max_sampled = workload
            .stats()
            .iter()
            .map(|s| s.total_sampled)
            .max()
            .unwrap() as f64;
        config.sampler_seconds_per_node = config
            .sampler_seconds_per_node
            .min(0.25 * min_producer / max_sampled);
        let epoch = |strategy: Strategy, config: &PipelineConfig| {
            let cfg = PipelineConfig {
                strategy,
                ..config.clone()
            };
            simulate_epoch_on(&workload, &table, &cfg).unwrap().epoch_seconds
        };
        let all_in = epoch(Strategy::AllInGpu, &config);
        let opt = epoch(Strategy::ZeroCopyOpt, &config);
        let naive = epoch(Strategy::ZeroCopyNaive, &config);
        assert!(
            all_in <= opt * (1.0 + 1e-9),
            "case {i}: resident {all_in} vs partitioned {opt}"
        );
        assert!(
            opt <= naive * (1.0 + 1e-9),
            "case {i}: partitioned {opt} vs whole-GPU {naive}"
        );
    }
    within_budget(start, Duration::from_secs(120), "criterion 9");
    println!(
        "criterion 9 PASS: {configs} invariant configs and {dominance_configs} dominance configs"
    );
}

#[test]
fn criterion_10_sampler_property_battery() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a3e_1e12);
    let graphs = 40;
    for g in 0..graphs {
        let n = rng.gen_range(20..=300u64);
        let d = rng.gen_range(1..=8u64).min(n - 1).max(1);
        let model = if rng.gen_bool(0.5) {
            DegreeModel::Uniform
        } else {
            DegreeModel::PowerLaw
        };
        let graph = generate_graph(n, d, model, rng.gen()).unwrap();
        let batch = rng.gen_range(1..=n);
        let fanouts: Vec<usize> = (0..rng.gen_range(1..=2))
            .map(|_| rng.gen_range(1..=8usize))
            .collect();
        let seed = rng.gen();
        let opts = SampleOptions {
            with_replacement: rng.gen_bool(0.3),
        };
        let stream = minibatch_stream_with(&graph, batch, &fanouts, seed, opts).unwrap();
        let replay = minibatch_stream_with(&graph, batch, &fanouts, seed, opts).unwrap();

        // Seed coverage: the epoch's minibatches partition the node set.
        let mut all_seeds: Vec<u64> = Vec::with_capacity(n as usize);
        for i in 0..stream.num_minibatches() {
            all_seeds.extend_from_slice(stream.seeds_of(i));
        }
        all_seeds.sort_unstable();
        assert_eq!(all_seeds, (0..n).collect::<Vec<_>>(), "graph {g}: seed coverage");

        for i in 0..stream.num_minibatches() {
            let plan = stream.plan_at(i);
            assert_eq!(plan, replay.plan_at(i), "graph {g}: determinism");

            // Membership and cardinality, layer by layer: each frontier node
            // contributes a contiguous run of min(degree, fanout) sampled
            // neighbors (exactly fanout when drawing with replacement).
            let mut seen: std::collections::HashSet<u64> = std::collections::HashSet::new();
            let mut unique: Vec<u64> = Vec::new();
            for &s in &plan.seeds {
                if seen.insert(s) {
                    unique.push(s);
                }
            }
            let mut frontier = unique.clone();
            for (layer_idx, layer) in plan.layers.iter().enumerate() {
                let fanout = fanouts[layer_idx];
                let mut cursor = 0usize;
                for &v in &frontier {
                    let nbrs = graph.neighbors(v);
                    if nbrs.is_empty() || fanout == 0 {
                        continue;
                    }
                    let take = if opts.with_replacement {
                        fanout
                    } else {
                        nbrs.len().min(fanout)
                    };
                    let slice = &layer[cursor..cursor + take];
                    cursor += take;
                    for &u in slice {
                        assert!(
                            nbrs.contains(&u),
                            "graph {g}: {u} not a neighbor of {v}"
                        );
                    }
                    if !opts.with_replacement {
                        // Without replacement means distinct adjacency
                        // positions; repeated values are possible only via
                        // multi-edges, so check uniqueness when the
                        // adjacency list itself has no duplicates.
                        let mut vals = nbrs.to_vec();
                        vals.sort_unstable();
                        vals.dedup();
                        if vals.len() == nbrs.len() {
                            let mut uniq = slice.to_vec();
                            uniq.sort_unstable();
                            uniq.dedup();
                            assert_eq!(uniq.len(), take, "graph {g}: repeat within one draw");
                        }
                    }
                }
                assert_eq!(cursor, layer.len(), "graph {g}: layer {layer_idx} size");
                for &u in layer {
                    if seen.insert(u) {
                        unique.push(u);
                    }
                }
                frontier = unique.clone();
            }
            assert_eq!(unique, plan.unique_nodes, "graph {g}: unique order");
        }
    }
    within_budget(start, Duration::from_secs(30), "criterion 10");
    println!("criterion 10 PASS: {graphs} random graphs, full-epoch membership/cardinality/coverage/determinism");
}

#[test]
fn report_payload_histogram_totals_are_consistent() {
    // Cross-check that the representative histogram in a simulation report
    // describes real requests: payload sums are multiples of 32 and counts
    // are positive.
    let s = shared();
    let cfg = PipelineConfig {
        strategy: Strategy::ZeroCopyOpt,
        ..s.fixture.config.clone()
    };
    let report = simulate_epoch_on(&s.workload, &s.fixture.table, &cfg).unwrap();
    let hist: &BTreeMap<u32, u64> = &report.request_histogram;
    assert!(!hist.is_empty());
    for (&payload, &count) in hist {
        assert_eq!(payload % 32, 0);
        assert!(payload <= 128);
        assert!(count > 0);
    }
}
