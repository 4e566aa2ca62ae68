//! Command-line front end over the gcs-core models.
//!
//! Every subcommand resolves one experiment (config file plus flag
//! overrides), calls into the library, and emits a single report to stdout
//! or `--out`. Exit codes: 0 success, 1 bad configuration, 2 bad input
//! data, 3 simulation failure (an out-of-memory strategy under `--strict`).

mod config;
mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gcs_core::gather::{apply_circular_shift, coalesce_trace, plan_offsets};
use gcs_core::graph::{generate_graph, save_csr, save_edge_list, DegreeModel, Fill, NodeId,
                      Placement};
use gcs_core::link::provisioning_bounds;
use gcs_core::pipeline::{
    compare_strategies, feature_dim_sweep, resource_sweep, simulate_epoch, ComparisonRow,
    SimReport, Strategy, StrategyOutcome, ALL_STRATEGIES,
};
use gcs_core::sampler::{minibatch_stream_with, SampleOptions};
use gcs_core::{Error, Result};

use config::{load_experiment, parse_bandwidth, read_experiment_file, resolve_pipeline,
             ExperimentFile, ResolvedConfig};
use report::{emit, fmt_bandwidth, fmt_bytes, fmt_seconds, timeline_csv, to_json, write_atomic,
             OutputFormat};

#[derive(Parser)]
#[command(
    name = "gcs",
    version,
    about = "Models the host-to-GPU feature data path of minibatch GNN training"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Report format. Defaults to json (bounds defaults to table).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Epoch seed. Falls back to the GCS_SEED environment variable, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fail (exit 3) when a strategy does not fit in device memory.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic graph.
    Gen(GenArgs),
    /// Emit minibatch plans as JSON lines.
    Sample(SampleArgs),
    /// Coalesce one gather into interconnect requests.
    Trace(TraceArgs),
    /// Print zero-copy SM provisioning bounds.
    Bounds(BoundsArgs),
    /// Simulate one training epoch under a single strategy.
    Simulate(SimulateArgs),
    /// Compare transfer strategies on one workload.
    Compare(CompareArgs),
    /// Sweep one knob and report every point.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: u64,
    #[arg(long)]
    avg_degree: u64,
    /// Degree model: uniform or power-law.
    #[arg(long, default_value = "uniform")]
    model: String,
}

#[derive(Args)]
struct SampleArgs {
    /// Experiment file providing graph, features, and sampling defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    batch_size: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    fanouts: Option<Vec<usize>>,
    #[arg(long)]
    with_replacement: bool,
    /// Emit only the first N minibatches.
    #[arg(long)]
    limit: Option<u64>,
}

#[derive(Args)]
struct TraceArgs {
    /// Bytes per feature row; must divide evenly by --elem-size.
    #[arg(long, conflicts_with = "feat_dim")]
    feat_bytes: Option<u64>,
    /// Elements per feature row.
    #[arg(long)]
    feat_dim: Option<u64>,
    #[arg(long, default_value_t = 4)]
    elem_size: u32,
    #[arg(long, default_value_t = 0)]
    base_offset: u64,
    /// Rows to gather, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "idx_file")]
    idx: Vec<u64>,
    /// File of whitespace-separated row ids.
    #[arg(long)]
    idx_file: Option<PathBuf>,
    /// Realign lanes by circular shift.
    #[arg(long, conflicts_with = "no_shift")]
    shift: bool,
    /// Keep the canonical lane order (the default).
    #[arg(long)]
    no_shift: bool,
    #[arg(long, default_value_t = 32)]
    warp_size: usize,
}

#[derive(Args)]
struct BoundsArgs {
    /// Experiment file providing link and GPU parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bandwidth the gather should sustain. Defaults to the wire rate.
    #[arg(long)]
    target_bandwidth: Option<String>,
    /// Request payload in bytes.
    #[arg(long, default_value_t = 128.0)]
    payload: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured strategy.
    #[arg(long)]
    strategy: Option<String>,
    /// Override the configured GPU count.
    #[arg(long)]
    gpus: Option<u32>,
    /// Also write the per-minibatch timeline CSV here.
    #[arg(long)]
    timeline: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Strategies to run, comma separated. Defaults to all six.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    /// GPU counts to run each strategy at.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    gpus: Vec<u32>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(subcommand)]
    which: SweepCmd,
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Zero-copy-opt gather bandwidth and epoch time across SM fractions.
    Resource(ResourceSweepArgs),
    /// Dma versus zero-copy-opt epoch time across feature dimensions.
    FeatureDim(FeatureDimSweepArgs),
}

#[derive(Args)]
struct ResourceSweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0.025,0.05,0.1,0.15,0.2,0.25")]
    fractions: Vec<f64>,
}

#[derive(Args)]
struct FeatureDimSweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024,2048,4096")]
    dims: Vec<u64>,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here and still exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gcs: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) => 1,
        Error::DeviceCapacity { .. } => 3,
        _ => 2,
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.cmd {
        Cmd::Gen(args) => cmd_gen(cli, args),
        Cmd::Sample(args) => cmd_sample(cli, args),
        Cmd::Trace(args) => cmd_trace(cli, args),
        Cmd::Bounds(args) => cmd_bounds(cli, args),
        Cmd::Simulate(args) => cmd_simulate(cli, args),
        Cmd::Compare(args) => cmd_compare(cli, args),
        Cmd::Sweep(args) => match &args.which {
            SweepCmd::Resource(a) => cmd_sweep_resource(cli, a),
            SweepCmd::FeatureDim(a) => cmd_sweep_feature_dim(cli, a),
        },
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("GCS_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("GCS_SEED {text:?} is not a valid seed"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(Error::InvalidParameter(format!("GCS_SEED: {e}"))),
    }
}

fn format_or(cli: &Cli, default: OutputFormat) -> OutputFormat {
    cli.format.unwrap_or(default)
}

// ---- gen ----------------------------------------------------------------

#[derive(Serialize)]
struct GenReport<'a> {
    config: GenConfig<'a>,
    nodes: u64,
    edges: u64,
    max_degree: u64,
}

#[derive(Serialize)]
struct GenConfig<'a> {
    nodes: u64,
    avg_degree: u64,
    model: DegreeModel,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a Path>,
}

fn parse_model(text: &str) -> Result<DegreeModel> {
    match text {
        "uniform" => Ok(DegreeModel::Uniform),
        "power-law" => Ok(DegreeModel::PowerLaw),
        other => Err(Error::InvalidParameter(format!(
            "unknown degree model {other:?}, use \"uniform\" or \"power-law\""
        ))),
    }
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<i32> {
    let seed = resolve_seed(cli.seed)?;
    let model = parse_model(&args.model)?;
    let graph = generate_graph(args.nodes, args.avg_degree, model, seed)?;
    match &cli.out {
        // ".csr" writes the binary layout, anything else a text edge list.
        Some(path) => {
            if path.extension().is_some_and(|e| e == "csr") {
                save_csr(&graph, path)?;
            } else {
                save_edge_list(&graph, path)?;
            }
            let report = GenReport {
                config: GenConfig {
                    nodes: args.nodes,
                    avg_degree: args.avg_degree,
                    model,
                    seed,
                    path: Some(path),
                },
                nodes: graph.num_nodes(),
                edges: graph.num_edges(),
                max_degree: graph.max_degree(),
            };
            let text = match format_or(cli, OutputFormat::Json) {
                OutputFormat::Table => format!(
                    "wrote {} nodes, {} edges to {}\n",
                    report.nodes,
                    report.edges,
                    path.display()
                ),
                _ => to_json(&report)?,
            };
            print!("{text}");
            Ok(0)
        }
        None => {
            let mut text = String::new();
            for src in 0..graph.num_nodes() {
                for &dst in graph.neighbors(src) {
                    writeln!(text, "{src} {dst}").expect("writing to a string");
                }
            }
            print!("{text}");
            Ok(0)
        }
    }
}

// ---- sample -------------------------------------------------------------

#[derive(Serialize)]
struct PlanLine<'a> {
    seeds: &'a [NodeId],
    layers: &'a [Vec<NodeId>],
    unique: &'a [NodeId],
    bytes: u64,
}

fn cmd_sample(cli: &Cli, args: &SampleArgs) -> Result<i32> {
    let seed = resolve_seed(cli.seed)?;
    let mut exp = load_experiment(args.config.as_deref(), seed)?;
    if let Some(v) = args.batch_size {
        exp.config.batch_size = v;
    }
    if let Some(v) = &args.fanouts {
        exp.config.fanouts = v.clone();
    }
    if args.with_replacement {
        exp.config.with_replacement = true;
    }
    let stream = minibatch_stream_with(
        &exp.graph,
        exp.config.batch_size,
        &exp.config.fanouts,
        seed,
        SampleOptions {
            with_replacement: exp.config.with_replacement,
        },
    )?;
    let stride = exp.table.row_stride_bytes();
    let count = stream
        .num_minibatches()
        .min(args.limit.unwrap_or(u64::MAX));
    let mut text = String::new();
    for i in 0..count {
        let plan = stream.plan_at(i);
        let line = PlanLine {
            seeds: &plan.seeds,
            layers: &plan.layers,
            unique: &plan.unique_nodes,
            bytes: plan.gather_bytes(stride),
        };
        let json = serde_json::to_string(&line)
            .map_err(|e| Error::Format(format!("serializing plan: {e}")))?;
        text.push_str(&json);
        text.push('\n');
    }
    emit(cli.out.as_deref(), &text)?;
    Ok(0)
}

// ---- trace --------------------------------------------------------------

#[derive(Serialize)]
struct TraceReport {
    config: TraceConfig,
    requests: Vec<RequestOut>,
    histogram: BTreeMap<u32, u64>,
    useful: u64,
    payload: u64,
}

#[derive(Serialize)]
struct TraceConfig {
    feat_dim: u64,
    elem_size: u32,
    base_offset: u64,
    warp_size: usize,
    shift: bool,
    idx: Vec<u64>,
}

#[derive(Serialize)]
struct RequestOut {
    addr: u64,
    payload: u32,
}

fn read_idx_file(path: &Path) -> Result<Vec<u64>> {
    let text = fs::read_to_string(path)?;
    let mut ids = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        for field in line.split_whitespace() {
            ids.push(field.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("bad row id {field:?}"),
            })?);
        }
    }
    Ok(ids)
}

fn cmd_trace(cli: &Cli, args: &TraceArgs) -> Result<i32> {
    let feat_dim = match (args.feat_bytes, args.feat_dim) {
        (Some(bytes), None) => {
            if bytes == 0 || bytes % args.elem_size as u64 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "--feat-bytes {bytes} is not a positive multiple of --elem-size {}",
                    args.elem_size
                )));
            }
            bytes / args.elem_size as u64
        }
        (None, Some(dim)) => dim,
        _ => {
            return Err(Error::InvalidParameter(
                "one of --feat-bytes or --feat-dim is required".into(),
            ))
        }
    };
    let idx = match &args.idx_file {
        Some(path) => read_idx_file(path)?,
        None => args.idx.clone(),
    };
    if idx.is_empty() {
        return Err(Error::InvalidParameter(
            "no rows to trace; pass --idx or --idx-file".into(),
        ));
    }
    let num_nodes = idx.iter().copied().max().unwrap_or(0) + 1;
    let table = gcs_core::graph::attach_features(
        num_nodes,
        feat_dim,
        args.elem_size,
        args.base_offset,
        Placement::HostMapped,
        Fill::None,
        u64::MAX,
    )?;
    let mut pairs = plan_offsets(&idx, feat_dim, args.warp_size);
    if args.shift {
        pairs = apply_circular_shift(&pairs, feat_dim, args.warp_size);
    }
    let trace = coalesce_trace(&table, &pairs);
    let report = TraceReport {
        config: TraceConfig {
            feat_dim,
            elem_size: args.elem_size,
            base_offset: args.base_offset,
            warp_size: args.warp_size,
            shift: args.shift,
            idx,
        },
        requests: trace
            .requests
            .iter()
            .map(|r| RequestOut {
                addr: r.start_address,
                payload: r.payload_bytes,
            })
            .collect(),
        histogram: trace.payload_histogram(),
        useful: trace.total_useful,
        payload: trace.total_payload,
    };
    let text = match format_or(cli, OutputFormat::Json) {
        OutputFormat::Table => {
            let mut t = String::new();
            writeln!(t, "requests: {}", report.requests.len()).unwrap();
            writeln!(t, "payload bytes: {}", report.payload).unwrap();
            writeln!(t, "useful bytes: {}", report.useful).unwrap();
            writeln!(
                t,
                "efficiency: {:.3}",
                report.useful as f64 / report.payload.max(1) as f64
            )
            .unwrap();
            writeln!(t, "payload histogram:").unwrap();
            for (payload, count) in &report.histogram {
                writeln!(t, "  {payload:>4} B x {count}").unwrap();
            }
            t
        }
        OutputFormat::Csv => {
            let mut t = String::from("addr,payload\n");
            for r in &report.requests {
                writeln!(t, "{},{}", r.addr, r.payload).unwrap();
            }
            t
        }
        OutputFormat::Json => to_json(&report)?,
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(0)
}

// ---- bounds -------------------------------------------------------------

#[derive(Serialize)]
struct BoundsReport {
    config: BoundsConfig,
    bounds: gcs_core::link::ProvisioningBounds,
}

#[derive(Serialize)]
struct BoundsConfig {
    target_bandwidth: f64,
    payload_bytes: f64,
    link: gcs_core::link::LinkParams,
    gpu: gcs_core::link::GpuSpec,
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> Result<i32> {
    let file = match &args.config {
        Some(path) => read_experiment_file(path)?,
        None => ExperimentFile::default(),
    };
    let pipeline = resolve_pipeline(&file)?;
    let target = match &args.target_bandwidth {
        Some(text) => parse_bandwidth(text).map_err(Error::InvalidParameter)?,
        None => pipeline.link.wire_bandwidth,
    };
    let bounds = provisioning_bounds(target, args.payload, &pipeline.link, &pipeline.gpu);
    let report = BoundsReport {
        config: BoundsConfig {
            target_bandwidth: target,
            payload_bytes: args.payload,
            link: pipeline.link,
            gpu: pipeline.gpu,
        },
        bounds,
    };
    let text = match format_or(cli, OutputFormat::Table) {
        OutputFormat::Json => to_json(&report)?,
        _ => {
            let mut t = String::new();
            writeln!(t, "zero-copy warp provisioning").unwrap();
            writeln!(
                t,
                "  target: {} at {:.0} B payloads",
                fmt_bandwidth(target),
                args.payload
            )
            .unwrap();
            writeln!(
                t,
                "  upper fraction of SMs: {:.1}%  (enough warps to own every read slot)",
                bounds.upper_fraction * 100.0
            )
            .unwrap();
            writeln!(
                t,
                "  lower fraction of SMs: {:.1}%  ({:.1} reads must stay in flight)",
                bounds.lower_fraction * 100.0,
                bounds.required_outstanding
            )
            .unwrap();
            t
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(0)
}

// ---- simulate -----------------------------------------------------------

#[derive(Serialize)]
struct SimulateReport<'a> {
    config: &'a ResolvedConfig,
    report: &'a SimReport,
}

#[derive(Serialize)]
struct OomReport<'a> {
    config: &'a ResolvedConfig,
    report: OomBody,
}

#[derive(Serialize)]
struct OomBody {
    result: &'static str,
    required: u64,
    capacity: u64,
}

fn simulate_table(report: &SimReport) -> String {
    let mut t = String::new();
    writeln!(t, "{:<22}{}", "strategy", report.strategy).unwrap();
    writeln!(t, "{:<22}{}", "gpus", report.num_gpus).unwrap();
    writeln!(t, "{:<22}{}", "minibatches", report.num_minibatches).unwrap();
    writeln!(t, "{:<22}{}", "epoch", fmt_seconds(report.epoch_seconds)).unwrap();
    writeln!(t, "{:<22}{}", "bytes moved", fmt_bytes(report.bytes_moved)).unwrap();
    writeln!(
        t,
        "{:<22}{}",
        "effective bandwidth",
        fmt_bandwidth(report.effective_bandwidth)
    )
    .unwrap();
    if report.gather_bandwidth > 0.0 {
        writeln!(
            t,
            "{:<22}{}",
            "gather bandwidth",
            fmt_bandwidth(report.gather_bandwidth)
        )
        .unwrap();
    }
    t
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<i32> {
    let seed = resolve_seed(cli.seed)?;
    let mut exp = load_experiment(args.config.as_deref(), seed)?;
    if let Some(text) = &args.strategy {
        exp.config.strategy = Strategy::from_str(text)?;
    }
    if let Some(gpus) = args.gpus {
        exp.config.num_gpus = gpus;
    }
    exp.sync_resolved();
    match simulate_epoch(&exp.graph, &exp.table, &exp.config, seed) {
        Ok(report) => {
            if let Some(path) = &args.timeline {
                write_atomic(path, &timeline_csv(&report))?;
            }
            let text = match format_or(cli, OutputFormat::Json) {
                OutputFormat::Json => to_json(&SimulateReport {
                    config: &exp.resolved,
                    report: &report,
                })?,
                OutputFormat::Csv => timeline_csv(&report),
                OutputFormat::Table => simulate_table(&report),
            };
            emit(cli.out.as_deref(), &text)?;
            Ok(0)
        }
        Err(Error::DeviceCapacity { required, capacity }) => {
            let text = match format_or(cli, OutputFormat::Json) {
                OutputFormat::Json => to_json(&OomReport {
                    config: &exp.resolved,
                    report: OomBody {
                        result: "out-of-memory",
                        required,
                        capacity,
                    },
                })?,
                _ => format!(
                    "strategy {} does not fit: needs {}, device holds {}\n",
                    exp.config.strategy,
                    fmt_bytes(required),
                    fmt_bytes(capacity)
                ),
            };
            emit(cli.out.as_deref(), &text)?;
            if cli.strict {
                eprintln!("gcs: strategy result is out-of-memory and --strict is set");
                Ok(3)
            } else {
                Ok(0)
            }
        }
        Err(e) => Err(e),
    }
}

// ---- compare ------------------------------------------------------------

#[derive(Serialize)]
struct CompareReport<'a> {
    config: &'a ResolvedConfig,
    rows: &'a [ComparisonRow],
}

fn compare_csv(rows: &[ComparisonRow]) -> String {
    let mut t = String::from(
        "strategy,num_gpus,result,epoch_seconds,effective_bandwidth,speedup_vs_dma1,\
         required,capacity\n",
    );
    for row in rows {
        match &row.outcome {
            StrategyOutcome::Completed {
                epoch_seconds,
                effective_bandwidth,
                speedup_vs_dma1,
            } => writeln!(
                t,
                "{},{},completed,{},{},{},,",
                row.strategy, row.num_gpus, epoch_seconds, effective_bandwidth, speedup_vs_dma1
            )
            .unwrap(),
            StrategyOutcome::OutOfMemory { required, capacity } => writeln!(
                t,
                "{},{},out-of-memory,,,,{},{}",
                row.strategy, row.num_gpus, required, capacity
            )
            .unwrap(),
        }
    }
    t
}

fn compare_table(rows: &[ComparisonRow]) -> String {
    let mut t = format!(
        "{:<17}{:>5}  {:<14}{:>12}{:>10}\n",
        "strategy", "gpus", "result", "epoch", "speedup"
    );
    for row in rows {
        match &row.outcome {
            StrategyOutcome::Completed {
                epoch_seconds,
                speedup_vs_dma1,
                ..
            } => writeln!(
                t,
                "{:<17}{:>5}  {:<14}{:>12}{:>10.2}",
                row.strategy.label(),
                row.num_gpus,
                "completed",
                fmt_seconds(*epoch_seconds),
                speedup_vs_dma1
            )
            .unwrap(),
            StrategyOutcome::OutOfMemory { required, capacity } => writeln!(
                t,
                "{:<17}{:>5}  {:<14}needs {}, device holds {}",
                row.strategy.label(),
                row.num_gpus,
                "out-of-memory",
                fmt_bytes(*required),
                fmt_bytes(*capacity)
            )
            .unwrap(),
        }
    }
    t
}

fn cmd_compare(cli: &Cli, args: &CompareArgs) -> Result<i32> {
    let seed = resolve_seed(cli.seed)?;
    let exp = load_experiment(args.config.as_deref(), seed)?;
    let strategies: Vec<Strategy> = match &args.strategies {
        Some(list) => list
            .iter()
            .map(|s| Strategy::from_str(s))
            .collect::<Result<_>>()?,
        None => ALL_STRATEGIES.to_vec(),
    };
    let rows = compare_strategies(
        &exp.graph,
        &exp.table,
        &exp.config,
        &strategies,
        &args.gpus,
        seed,
    )?;
    let text = match format_or(cli, OutputFormat::Json) {
        OutputFormat::Json => to_json(&CompareReport {
            config: &exp.resolved,
            rows: &rows,
        })?,
        OutputFormat::Csv => compare_csv(&rows),
        OutputFormat::Table => compare_table(&rows),
    };
    emit(cli.out.as_deref(), &text)?;
    let any_oom = rows
        .iter()
        .any(|r| matches!(r.outcome, StrategyOutcome::OutOfMemory { .. }));
    if any_oom && cli.strict {
        eprintln!("gcs: a strategy result is out-of-memory and --strict is set");
        Ok(3)
    } else {
        Ok(0)
    }
}

// ---- sweeps -------------------------------------------------------------

#[derive(Serialize)]
struct SweepReport<'a, P: Serialize> {
    config: &'a ResolvedConfig,
    points: &'a [P],
}

fn cmd_sweep_resource(cli: &Cli, args: &ResourceSweepArgs) -> Result<i32> {
    let seed = resolve_seed(cli.seed)?;
    let exp = load_experiment(args.config.as_deref(), seed)?;
    let points = resource_sweep(&exp.graph, &exp.table, &exp.config, &args.fractions, seed)?;
    let text = match format_or(cli, OutputFormat::Json) {
        OutputFormat::Json => to_json(&SweepReport {
            config: &exp.resolved,
            points: &points,
        })?,
        OutputFormat::Csv => {
            let mut t = String::from("resource_fraction,gather_bandwidth,epoch_seconds\n");
            for p in &points {
                writeln!(t, "{},{},{}", p.resource_fraction, p.gather_bandwidth, p.epoch_seconds)
                    .unwrap();
            }
            t
        }
        OutputFormat::Table => {
            let mut t = format!("{:>10}{:>14}{:>12}\n", "fraction", "gather", "epoch");
            for p in &points {
                writeln!(
                    t,
                    "{:>10.3}{:>14}{:>12}",
                    p.resource_fraction,
                    fmt_bandwidth(p.gather_bandwidth),
                    fmt_seconds(p.epoch_seconds)
                )
                .unwrap();
            }
            t
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_sweep_feature_dim(cli: &Cli, args: &FeatureDimSweepArgs) -> Result<i32> {
    let seed = resolve_seed(cli.seed)?;
    let exp = load_experiment(args.config.as_deref(), seed)?;
    let points = feature_dim_sweep(&exp.graph, &exp.table, &exp.config, &args.dims, seed)?;
    let text = match format_or(cli, OutputFormat::Json) {
        OutputFormat::Json => to_json(&SweepReport {
            config: &exp.resolved,
            points: &points,
        })?,
        OutputFormat::Csv => {
            let mut t =
                String::from("feat_dim,dma_epoch_seconds,zero_copy_opt_epoch_seconds,speedup\n");
            for p in &points {
                writeln!(
                    t,
                    "{},{},{},{}",
                    p.feat_dim, p.dma_epoch_seconds, p.zero_copy_opt_epoch_seconds, p.speedup
                )
                .unwrap();
            }
            t
        }
        OutputFormat::Table => {
            let mut t = format!(
                "{:>9}{:>12}{:>14}{:>9}\n",
                "feat_dim", "dma", "zero-copy-opt", "speedup"
            );
            for p in &points {
                writeln!(
                    t,
                    "{:>9}{:>12}{:>14}{:>9.2}",
                    p.feat_dim,
                    fmt_seconds(p.dma_epoch_seconds),
                    fmt_seconds(p.zero_copy_opt_epoch_seconds),
                    p.speedup
                )
                .unwrap();
            }
            t
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(0)
}
