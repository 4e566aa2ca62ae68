//! Deterministic simulation of the minibatch training pipeline.
//!
//! One epoch runs three stages per minibatch: a CPU sampler produces the
//! minibatch plan, a producer stages the feature rows for the GPU, and a
//! consumer trains on them. Producers run ahead of consumers through a fixed
//! set of ping-pong buffers and synchronize once per minibatch. The producer
//! stage is where the transfer strategies differ: CPU gather plus DMA, page
//! migration, or zero-copy reads issued from a slice of the GPU's SMs.
//!
//! Stage durations come from the analytic models in [`crate::link`] plus two
//! calibration constants (train seconds per minibatch, sampler seconds per
//! sampled node). The scheduler is exact: per GPU, stage start times follow
//! a small recurrence over minibatch indices, so there is no event queue and
//! no tie-breaking nondeterminism. Multi-GPU runs split the epoch's
//! minibatches round-robin and share the host link and host memory system in
//! equal static shares.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gather::{apply_circular_shift, coalesce_trace, plan_offsets};
use crate::graph::{CsrGraph, FeatureTable, NodeId};
use crate::link::{
    cpu_gather_time, dma_transfer_time, uvm_migration_time, zero_copy_bandwidth, GpuSpec,
    LinkParams,
};
use crate::sampler::{minibatch_stream_with, SampleOptions};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default ceiling on combined link traffic from all GPUs, 51.7 * 2^30
/// bytes/s: two-GPU aggregate read bandwidth of the modeled host.
pub const DEFAULT_AGGREGATE_LINK_CAP: f64 = 51.7 * (1u64 << 30) as f64;

/// How minibatch features reach the GPU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Gather and train on the CPU; the link is never used.
    CpuOnly,
    /// CPU workers gather rows into a dense staging buffer, a DMA engine
    /// copies it over; the copy overlaps training.
    Dma,
    /// Features live in migratable memory; touched pages fault over one by
    /// one, stalling training while they do.
    Uvm,
    /// GPU threads read rows from mapped host memory with the whole GPU; the
    /// gather kernel and the training kernels do not overlap.
    ZeroCopyNaive,
    /// Zero-copy reads from a reserved fraction of SMs, with the realigned
    /// access plan; gather overlaps training, which runs on the remaining
    /// SMs.
    ZeroCopyOpt,
    /// Features fully resident in device memory; nothing to transfer.
    AllInGpu,
}

/// Every strategy, in comparison-table order.
pub const ALL_STRATEGIES: [Strategy; 6] = [
    Strategy::CpuOnly,
    Strategy::Dma,
    Strategy::Uvm,
    Strategy::ZeroCopyNaive,
    Strategy::ZeroCopyOpt,
    Strategy::AllInGpu,
];

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::CpuOnly => "cpu-only",
            Strategy::Dma => "dma",
            Strategy::Uvm => "uvm",
            Strategy::ZeroCopyNaive => "zero-copy-naive",
            Strategy::ZeroCopyOpt => "zero-copy-opt",
            Strategy::AllInGpu => "all-in-gpu",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        ALL_STRATEGIES
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown strategy {s:?}; expected one of cpu-only, dma, uvm, \
                     zero-copy-naive, zero-copy-opt, all-in-gpu"
                ))
            })
    }
}

/// How training time responds to losing a fraction X of the GPU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainScaling {
    /// Time scales with the inverse compute share: base / (1 - X).
    Linear,
    /// No inflation; training is assumed insensitive to the lost SMs.
    Flat,
}

/// Training-time model. `base_per_minibatch` is the wall time of one
/// training step with the whole GPU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainModel {
    pub base_per_minibatch: f64,
    pub scaling: TrainScaling,
    /// Multiplier applied under the cpu-only strategy, where the step runs
    /// on host cores instead of the GPU.
    pub cpu_only_factor: f64,
}

impl TrainModel {
    fn partitioned(&self, x: f64) -> f64 {
        match self.scaling {
            TrainScaling::Linear => self.base_per_minibatch / (1.0 - x),
            TrainScaling::Flat => self.base_per_minibatch,
        }
    }
}

impl Default for TrainModel {
    fn default() -> Self {
        TrainModel {
            base_per_minibatch: 5e-3,
            scaling: TrainScaling::Linear,
            cpu_only_factor: 10.0,
        }
    }
}

/// Host memory system as seen by gather workers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HostModel {
    /// Raw host memory bandwidth in bytes/s.
    pub mem_bandwidth: f64,
    /// Fraction of it a strided gather actually achieves.
    pub gather_efficiency: f64,
    /// Concurrent workers beyond this count stop slowing each other down.
    pub worker_share_cap: u32,
}

impl Default for HostModel {
    fn default() -> Self {
        HostModel {
            mem_bandwidth: 100e9,
            gather_efficiency: 0.5,
            worker_share_cap: 16,
        }
    }
}

/// Page-migration parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UvmModel {
    pub page_size: u64,
    pub fault_latency: f64,
}

impl Default for UvmModel {
    fn default() -> Self {
        UvmModel {
            page_size: 4096,
            fault_latency: 20e-6,
        }
    }
}

/// Everything the simulator needs besides the graph and feature table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub strategy: Strategy,
    pub num_gpus: u32,
    /// Fraction X of SMs reserved for the producer (zero-copy-opt only).
    pub resource_fraction: f64,
    /// Minibatches the producer may run ahead of the consumer.
    pub pingpong_depth: u32,
    pub batch_size: u64,
    pub fanouts: Vec<usize>,
    pub train: TrainModel,
    /// Sampler wall time per sampled node (seeds plus every layer draw).
    pub sampler_seconds_per_node: f64,
    pub host: HostModel,
    pub uvm: UvmModel,
    /// Combined link traffic cap across GPUs, bytes/s.
    pub aggregate_link_cap: f64,
    pub gpu: GpuSpec,
    pub link: LinkParams,
    /// When true each GPU runs the full epoch instead of a 1/num_gpus slice.
    pub weak_scaling: bool,
    /// Unique rows from the first minibatch used to build the representative
    /// request histogram for rate estimation.
    pub histogram_sample_rows: usize,
    pub with_replacement: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            strategy: Strategy::Dma,
            num_gpus: 1,
            resource_fraction: 0.10,
            pingpong_depth: 2,
            batch_size: 1000,
            fanouts: vec![10, 25],
            train: TrainModel::default(),
            sampler_seconds_per_node: 8e-9,
            host: HostModel::default(),
            uvm: UvmModel::default(),
            aggregate_link_cap: DEFAULT_AGGREGATE_LINK_CAP,
            gpu: GpuSpec::default(),
            link: LinkParams::default(),
            weak_scaling: false,
            histogram_sample_rows: 4096,
            with_replacement: false,
        }
    }
}

fn validate_config(config: &PipelineConfig) -> Result<()> {
    if config.num_gpus < 1 {
        return Err(Error::InvalidParameter("num_gpus must be at least 1".into()));
    }
    if config.pingpong_depth < 1 {
        return Err(Error::InvalidParameter(
            "pingpong_depth must be at least 1".into(),
        ));
    }
    if config.batch_size < 1 {
        return Err(Error::InvalidParameter("batch_size must be at least 1".into()));
    }
    if config.strategy == Strategy::ZeroCopyOpt
        && !(config.resource_fraction > 0.0 && config.resource_fraction < 1.0)
    {
        return Err(Error::InvalidParameter(format!(
            "resource_fraction {} must lie strictly between 0 and 1",
            config.resource_fraction
        )));
    }
    if !(config.aggregate_link_cap > 0.0) || !(config.host.mem_bandwidth > 0.0) {
        return Err(Error::InvalidParameter(
            "bandwidth parameters must be positive".into(),
        ));
    }
    if config.sampler_seconds_per_node < 0.0 || config.train.base_per_minibatch < 0.0 {
        return Err(Error::InvalidParameter(
            "time parameters must be non-negative".into(),
        ));
    }
    Ok(())
}

/// Per-minibatch sampling statistics, all the simulator keeps of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlanStats {
    pub unique_nodes: u64,
    pub total_sampled: u64,
    pub touched_pages: u64,
}

/// One epoch's sampled workload, reduced to per-minibatch statistics plus a
/// representative row sample for request-histogram estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    stats: Vec<PlanStats>,
    rep_rows: Vec<NodeId>,
}

impl Workload {
    pub fn num_minibatches(&self) -> usize {
        self.stats.len()
    }

    pub fn stats(&self) -> &[PlanStats] {
        &self.stats
    }

    pub fn rep_rows(&self) -> &[NodeId] {
        &self.rep_rows
    }

    pub fn mean_unique_nodes(&self) -> f64 {
        if self.stats.is_empty() {
            return 0.0;
        }
        self.stats.iter().map(|s| s.unique_nodes as f64).sum::<f64>() / self.stats.len() as f64
    }
}

/// Samples one epoch and reduces each minibatch plan to [`PlanStats`].
/// Parallel over minibatches under the `parallel` feature; output is
/// identical either way.
pub fn build_workload(
    graph: &CsrGraph,
    table: &FeatureTable,
    config: &PipelineConfig,
    seed: u64,
) -> Result<Workload> {
    validate_config(config)?;
    let stream = minibatch_stream_with(
        graph,
        config.batch_size,
        &config.fanouts,
        seed,
        SampleOptions {
            with_replacement: config.with_replacement,
        },
    )?;
    let n = stream.num_minibatches();
    let stat_of = |i: u64| {
        let plan = stream.plan_at(i);
        PlanStats {
            unique_nodes: plan.unique_nodes.len() as u64,
            total_sampled: plan.total_sampled(),
            touched_pages: table.touched_pages(&plan.unique_nodes, config.uvm.page_size),
        }
    };
    #[cfg(feature = "parallel")]
    let stats: Vec<PlanStats> = (0..n).into_par_iter().map(stat_of).collect();
    #[cfg(not(feature = "parallel"))]
    let stats: Vec<PlanStats> = (0..n).map(stat_of).collect();
    let rep_rows = if n > 0 {
        let mut rows = stream.plan_at(0).unique_nodes;
        rows.truncate(config.histogram_sample_rows.max(1));
        rows
    } else {
        Vec::new()
    };
    Ok(Workload { stats, rep_rows })
}

/// Sequential twin of [`build_workload`].
pub fn build_workload_seq(
    graph: &CsrGraph,
    table: &FeatureTable,
    config: &PipelineConfig,
    seed: u64,
) -> Result<Workload> {
    validate_config(config)?;
    let stream = minibatch_stream_with(
        graph,
        config.batch_size,
        &config.fanouts,
        seed,
        SampleOptions {
            with_replacement: config.with_replacement,
        },
    )?;
    let n = stream.num_minibatches();
    let stats: Vec<PlanStats> = (0..n)
        .map(|i| {
            let plan = stream.plan_at(i);
            PlanStats {
                unique_nodes: plan.unique_nodes.len() as u64,
                total_sampled: plan.total_sampled(),
                touched_pages: table.touched_pages(&plan.unique_nodes, config.uvm.page_size),
            }
        })
        .collect();
    let rep_rows = if n > 0 {
        let mut rows = stream.plan_at(0).unique_nodes;
        rows.truncate(config.histogram_sample_rows.max(1));
        rows
    } else {
        Vec::new()
    };
    Ok(Workload { stats, rep_rows })
}

/// Half-open time span in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// True when the two spans share any interior time.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Timing of one minibatch on its GPU. Durations break the producer into
/// its gather and transfer parts; the intervals are the scheduled spans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinibatchTiming {
    /// Epoch-global minibatch index.
    pub minibatch: usize,
    pub sampler_seconds: f64,
    pub gather_seconds: f64,
    pub transfer_seconds: f64,
    pub train_seconds: f64,
    pub sampler: Interval,
    pub producer: Interval,
    pub consumer: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpuTimeline {
    pub gpu: u32,
    pub minibatches: Vec<MinibatchTiming>,
}

/// Result of one simulated epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub strategy: Strategy,
    pub num_gpus: u32,
    pub num_minibatches: usize,
    /// Wall time of the epoch: latest consumer end over all GPUs.
    pub epoch_seconds: f64,
    /// Feature bytes moved over the link (all strategies that use it).
    pub bytes_moved: u64,
    /// `bytes_moved / epoch_seconds`.
    pub effective_bandwidth: f64,
    /// Producer read rate for the zero-copy strategies, 0 otherwise.
    pub gather_bandwidth: f64,
    /// Representative request histogram (zero-copy strategies only).
    pub request_histogram: BTreeMap<u32, u64>,
    pub per_gpu: Vec<GpuTimeline>,
}

#[derive(Debug, Clone, Copy)]
struct StageDurations {
    sampler: f64,
    gather: f64,
    transfer: f64,
    train: f64,
}

impl StageDurations {
    fn producer(&self) -> f64 {
        self.gather + self.transfer
    }
}

/// Schedules one GPU's minibatch sequence. The recurrence encodes: samplers
/// run back to back; a producer waits for its sample, the previous producer,
/// and the buffer freed by consumer `i - depth` (plus the previous consumer
/// entirely when the strategy forbids producer/consumer overlap); a consumer
/// waits for its producer (the once-per-minibatch synchronization) and the
/// previous consumer.
fn schedule(
    stages: &[StageDurations],
    depth: usize,
    serialize: bool,
) -> Vec<(Interval, Interval, Interval)> {
    let mut out = Vec::with_capacity(stages.len());
    let mut prev_s_end = 0.0f64;
    let mut prev_p_end = 0.0f64;
    let mut c_ends: Vec<f64> = Vec::with_capacity(stages.len());
    for (i, st) in stages.iter().enumerate() {
        let s_start = prev_s_end;
        let s_end = s_start + st.sampler;
        let mut p_start = s_end.max(prev_p_end);
        if i >= depth {
            p_start = p_start.max(c_ends[i - depth]);
        }
        if serialize && i >= 1 {
            p_start = p_start.max(c_ends[i - 1]);
        }
        let p_end = p_start + st.producer();
        let c_start = p_end.max(c_ends.last().copied().unwrap_or(0.0));
        let c_end = c_start + st.train;
        out.push((
            Interval { start: s_start, end: s_end },
            Interval { start: p_start, end: p_end },
            Interval { start: c_start, end: c_end },
        ));
        prev_s_end = s_end;
        prev_p_end = p_end;
        c_ends.push(c_end);
    }
    out
}

/// Link parameters after splitting the aggregate cap across GPUs.
fn shared_link(config: &PipelineConfig) -> LinkParams {
    let share = (config.aggregate_link_cap / config.num_gpus as f64)
        .min(config.link.wire_bandwidth);
    LinkParams {
        wire_bandwidth: share,
        ..config.link
    }
}

/// Warps available to a producer running on `fraction` of the SMs.
fn partitioned_warps(gpu: &GpuSpec, fraction: f64) -> u64 {
    let sms = ((fraction * gpu.num_sms as f64).floor() as u64).max(1);
    sms * gpu.warps_per_sm() as u64
}

fn representative_histogram(
    table: &FeatureTable,
    rows: &[NodeId],
    shifted: bool,
    warp_size: usize,
) -> BTreeMap<u32, u64> {
    if rows.is_empty() {
        return BTreeMap::new();
    }
    let pairs = plan_offsets(rows, table.feat_dim(), warp_size);
    let pairs = if shifted {
        apply_circular_shift(&pairs, table.feat_dim(), warp_size)
    } else {
        pairs
    };
    coalesce_trace(table, &pairs).payload_histogram()
}

struct StrategyRates {
    /// Zero-copy read bandwidth, if the strategy uses one.
    gather_bandwidth: f64,
    histogram: BTreeMap<u32, u64>,
    serialize: bool,
}

fn strategy_rates(
    table: &FeatureTable,
    workload: &Workload,
    config: &PipelineConfig,
) -> StrategyRates {
    let link = shared_link(config);
    match config.strategy {
        Strategy::ZeroCopyNaive => {
            let hist = representative_histogram(
                table,
                workload.rep_rows(),
                false,
                config.gpu.warp_size as usize,
            );
            let bw = zero_copy_bandwidth(&hist, &link, config.gpu.total_warps());
            StrategyRates {
                gather_bandwidth: bw.bandwidth,
                histogram: hist,
                serialize: true,
            }
        }
        Strategy::ZeroCopyOpt => {
            let hist = representative_histogram(
                table,
                workload.rep_rows(),
                true,
                config.gpu.warp_size as usize,
            );
            let warps = partitioned_warps(&config.gpu, config.resource_fraction);
            let bw = zero_copy_bandwidth(&hist, &link, warps);
            StrategyRates {
                gather_bandwidth: bw.bandwidth,
                histogram: hist,
                serialize: false,
            }
        }
        Strategy::Uvm => StrategyRates {
            gather_bandwidth: 0.0,
            histogram: BTreeMap::new(),
            serialize: true,
        },
        Strategy::CpuOnly | Strategy::Dma | Strategy::AllInGpu => StrategyRates {
            gather_bandwidth: 0.0,
            histogram: BTreeMap::new(),
            serialize: false,
        },
    }
}

fn stage_durations(
    stats: &PlanStats,
    table: &FeatureTable,
    config: &PipelineConfig,
    rates: &StrategyRates,
) -> StageDurations {
    let link = shared_link(config);
    let bytes = stats.unique_nodes * table.row_stride_bytes();
    let id_bytes = stats.unique_nodes * 8;
    let sampler = config.sampler_seconds_per_node * stats.total_sampled as f64;
    let base = config.train.base_per_minibatch;
    let zc_gather = |bw: f64| {
        if bytes == 0 {
            0.0
        } else {
            bytes as f64 / bw
        }
    };
    match config.strategy {
        Strategy::CpuOnly => StageDurations {
            sampler,
            gather: cpu_gather_time(
                bytes,
                config.host.mem_bandwidth,
                config.host.gather_efficiency,
                config.num_gpus,
                config.host.worker_share_cap,
            ),
            transfer: 0.0,
            train: base * config.train.cpu_only_factor,
        },
        Strategy::Dma => StageDurations {
            sampler,
            gather: cpu_gather_time(
                bytes,
                config.host.mem_bandwidth,
                config.host.gather_efficiency,
                config.num_gpus,
                config.host.worker_share_cap,
            ),
            transfer: dma_transfer_time(bytes, &link),
            train: base,
        },
        Strategy::Uvm => StageDurations {
            sampler,
            gather: 0.0,
            transfer: uvm_migration_time(
                stats.touched_pages,
                config.uvm.page_size,
                config.uvm.fault_latency,
                link.wire_bandwidth,
            ),
            train: base,
        },
        Strategy::ZeroCopyNaive => StageDurations {
            sampler,
            gather: zc_gather(rates.gather_bandwidth),
            transfer: dma_transfer_time(id_bytes, &link),
            train: base,
        },
        Strategy::ZeroCopyOpt => StageDurations {
            sampler,
            gather: zc_gather(rates.gather_bandwidth),
            transfer: dma_transfer_time(id_bytes, &link),
            train: config.train.partitioned(config.resource_fraction),
        },
        Strategy::AllInGpu => StageDurations {
            sampler,
            gather: 0.0,
            transfer: 0.0,
            train: base,
        },
    }
}

/// Bytes the strategy moves over the link for one minibatch.
fn link_bytes(stats: &PlanStats, table: &FeatureTable, config: &PipelineConfig) -> u64 {
    match config.strategy {
        Strategy::CpuOnly | Strategy::AllInGpu => 0,
        Strategy::Uvm => stats.touched_pages * config.uvm.page_size,
        Strategy::Dma | Strategy::ZeroCopyNaive | Strategy::ZeroCopyOpt => {
            stats.unique_nodes * table.row_stride_bytes()
        }
    }
}

/// Global minibatch indices each GPU runs, in execution order.
fn gpu_assignments(n: usize, num_gpus: u32, weak_scaling: bool) -> Vec<Vec<usize>> {
    let g = num_gpus as usize;
    if weak_scaling {
        return vec![(0..n).collect(); g];
    }
    let mut per_gpu: Vec<Vec<usize>> = vec![Vec::with_capacity(n / g + 1); g];
    for k in 0..n {
        per_gpu[k % g].push(k);
    }
    per_gpu
}

/// Simulates one epoch over an already-sampled workload.
pub fn simulate_epoch_on(
    workload: &Workload,
    table: &FeatureTable,
    config: &PipelineConfig,
) -> Result<SimReport> {
    validate_config(config)?;
    if config.strategy == Strategy::AllInGpu
        && table.total_bytes() > config.gpu.device_mem_capacity
    {
        return Err(Error::DeviceCapacity {
            required: table.total_bytes(),
            capacity: config.gpu.device_mem_capacity,
        });
    }
    let rates = strategy_rates(table, workload, config);
    let assignments = gpu_assignments(
        workload.num_minibatches(),
        config.num_gpus,
        config.weak_scaling,
    );
    let mut per_gpu = Vec::with_capacity(assignments.len());
    let mut epoch_seconds = 0.0f64;
    let mut bytes_moved = 0u64;
    for (gpu, indices) in assignments.iter().enumerate() {
        let durations: Vec<StageDurations> = indices
            .iter()
            .map(|&k| stage_durations(&workload.stats()[k], table, config, &rates))
            .collect();
        let spans = schedule(&durations, config.pingpong_depth as usize, rates.serialize);
        let minibatches: Vec<MinibatchTiming> = indices
            .iter()
            .zip(&durations)
            .zip(&spans)
            .map(|((&k, d), (s, p, c))| MinibatchTiming {
                minibatch: k,
                sampler_seconds: d.sampler,
                gather_seconds: d.gather,
                transfer_seconds: d.transfer,
                train_seconds: d.train,
                sampler: *s,
                producer: *p,
                consumer: *c,
            })
            .collect();
        if let Some(last) = minibatches.last() {
            epoch_seconds = epoch_seconds.max(last.consumer.end);
        }
        bytes_moved += indices
            .iter()
            .map(|&k| link_bytes(&workload.stats()[k], table, config))
            .sum::<u64>();
        per_gpu.push(GpuTimeline {
            gpu: gpu as u32,
            minibatches,
        });
    }
    let effective_bandwidth = if epoch_seconds > 0.0 {
        bytes_moved as f64 / epoch_seconds
    } else {
        0.0
    };
    Ok(SimReport {
        strategy: config.strategy,
        num_gpus: config.num_gpus,
        num_minibatches: workload.num_minibatches(),
        epoch_seconds,
        bytes_moved,
        effective_bandwidth,
        gather_bandwidth: rates.gather_bandwidth,
        request_histogram: rates.histogram,
        per_gpu,
    })
}

/// Samples an epoch and simulates it under `config`.
pub fn simulate_epoch(
    graph: &CsrGraph,
    table: &FeatureTable,
    config: &PipelineConfig,
    seed: u64,
) -> Result<SimReport> {
    let workload = build_workload(graph, table, config, seed)?;
    simulate_epoch_on(&workload, table, config)
}

/// One row of a strategy comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub strategy: Strategy,
    pub num_gpus: u32,
    pub outcome: StrategyOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum StrategyOutcome {
    Completed {
        epoch_seconds: f64,
        effective_bandwidth: f64,
        /// Epoch time of single-GPU dma divided by this row's epoch time.
        speedup_vs_dma1: f64,
    },
    /// The strategy cannot hold the feature table in device memory.
    OutOfMemory { required: u64, capacity: u64 },
}

/// Simulates every (strategy, GPU count) combination on one shared sampled
/// workload and reports speedups against single-GPU dma. Out-of-memory
/// results become rows, not errors.
pub fn compare_strategies(
    graph: &CsrGraph,
    table: &FeatureTable,
    base_config: &PipelineConfig,
    strategies: &[Strategy],
    num_gpus_list: &[u32],
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    if strategies.is_empty() || num_gpus_list.is_empty() {
        return Err(Error::InvalidParameter(
            "strategy comparison needs at least one strategy and one GPU count".into(),
        ));
    }
    let workload = build_workload(graph, table, base_config, seed)?;
    let baseline_cfg = PipelineConfig {
        strategy: Strategy::Dma,
        num_gpus: 1,
        ..base_config.clone()
    };
    let baseline = simulate_epoch_on(&workload, table, &baseline_cfg)?.epoch_seconds;
    let mut rows = Vec::with_capacity(strategies.len() * num_gpus_list.len());
    for &strategy in strategies {
        for &num_gpus in num_gpus_list {
            let cfg = PipelineConfig {
                strategy,
                num_gpus,
                ..base_config.clone()
            };
            let outcome = match simulate_epoch_on(&workload, table, &cfg) {
                Ok(report) => StrategyOutcome::Completed {
                    epoch_seconds: report.epoch_seconds,
                    effective_bandwidth: report.effective_bandwidth,
                    speedup_vs_dma1: if report.epoch_seconds > 0.0 {
                        baseline / report.epoch_seconds
                    } else {
                        1.0
                    },
                },
                Err(Error::DeviceCapacity { required, capacity }) => {
                    StrategyOutcome::OutOfMemory { required, capacity }
                }
                Err(e) => return Err(e),
            };
            rows.push(ComparisonRow {
                strategy,
                num_gpus,
                outcome,
            });
        }
    }
    Ok(rows)
}

/// One point of a producer resource-fraction sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourcePoint {
    pub resource_fraction: f64,
    /// Zero-copy read bandwidth the producer achieves at this fraction.
    pub gather_bandwidth: f64,
    pub epoch_seconds: f64,
}

/// Sweeps the zero-copy-opt resource fraction over `fractions` on one shared
/// workload.
pub fn resource_sweep(
    graph: &CsrGraph,
    table: &FeatureTable,
    base_config: &PipelineConfig,
    fractions: &[f64],
    seed: u64,
) -> Result<Vec<ResourcePoint>> {
    let cfg0 = PipelineConfig {
        strategy: Strategy::ZeroCopyOpt,
        resource_fraction: fractions.first().copied().unwrap_or(0.1),
        ..base_config.clone()
    };
    let workload = build_workload(graph, table, &cfg0, seed)?;
    fractions
        .iter()
        .map(|&x| {
            let cfg = PipelineConfig {
                resource_fraction: x,
                ..cfg0.clone()
            };
            let report = simulate_epoch_on(&workload, table, &cfg)?;
            Ok(ResourcePoint {
                resource_fraction: x,
                gather_bandwidth: report.gather_bandwidth,
                epoch_seconds: report.epoch_seconds,
            })
        })
        .collect()
}

/// One point of a feature-dimension sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimPoint {
    pub feat_dim: u64,
    pub dma_epoch_seconds: f64,
    pub zero_copy_opt_epoch_seconds: f64,
    /// dma epoch over zero-copy-opt epoch at this dimension.
    pub speedup: f64,
}

/// Re-times one shared workload across feature dimensions, comparing dma
/// against zero-copy-opt at each. The sampled node sets do not depend on the
/// feature width, so only the byte volumes and request histograms change.
pub fn feature_dim_sweep(
    graph: &CsrGraph,
    table: &FeatureTable,
    base_config: &PipelineConfig,
    dims: &[u64],
    seed: u64,
) -> Result<Vec<DimPoint>> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter(
            "feature dimension sweep needs at least one dimension".into(),
        ));
    }
    let workload = build_workload(graph, table, base_config, seed)?;
    dims.iter()
        .map(|&dim| {
            let t = table.with_feat_dim(dim, config_capacity(base_config))?;
            let dma_cfg = PipelineConfig {
                strategy: Strategy::Dma,
                ..base_config.clone()
            };
            let opt_cfg = PipelineConfig {
                strategy: Strategy::ZeroCopyOpt,
                ..base_config.clone()
            };
            let dma = simulate_epoch_on(&workload, &t, &dma_cfg)?;
            let opt = simulate_epoch_on(&workload, &t, &opt_cfg)?;
            Ok(DimPoint {
                feat_dim: dim,
                dma_epoch_seconds: dma.epoch_seconds,
                zero_copy_opt_epoch_seconds: opt.epoch_seconds,
                speedup: if opt.epoch_seconds > 0.0 {
                    dma.epoch_seconds / opt.epoch_seconds
                } else {
                    1.0
                },
            })
        })
        .collect()
}

fn config_capacity(config: &PipelineConfig) -> u64 {
    config.gpu.device_mem_capacity
}
