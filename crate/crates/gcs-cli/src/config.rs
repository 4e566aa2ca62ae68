//! Experiment files: TOML with optional sections, unknown keys rejected.
//!
//! Every field is optional and defaults to the calibrated reference workload,
//! so a missing or empty file is a valid experiment. Byte quantities accept
//! binary suffixes ("4 KiB", "24 GiB"), bandwidths accept "GB/s" (decimal,
//! 1e9 bytes/s) and "GiB/s" (binary); bare numbers mean bytes or bytes/s.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use gcs_core::fixtures;
use gcs_core::graph::{
    attach_features, generate_graph, load_csr, load_edge_list, CsrGraph, DegreeModel,
    FeatureTable, Fill, Placement,
};
use gcs_core::link::{GpuSpec, LinkParams};
use gcs_core::pipeline::{PipelineConfig, Strategy, TrainScaling};
use gcs_core::{Error, Result};

/// Byte count parsed from an integer or a suffixed string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ByteSize(pub u64);

/// Bytes per second parsed from a number or a suffixed string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth(pub f64);

fn split_unit(text: &str) -> (&str, &str) {
    let pos = text
        .rfind(|c: char| c.is_ascii_digit() || c == '.')
        .map(|i| i + 1)
        .unwrap_or(0);
    (text[..pos].trim(), text[pos..].trim())
}

pub fn parse_byte_size(text: &str) -> std::result::Result<u64, String> {
    let (num, unit) = split_unit(text.trim());
    let mult: u64 = match unit {
        "" | "B" => 1,
        "KiB" => 1 << 10,
        "MiB" => 1 << 20,
        "GiB" => 1 << 30,
        other => return Err(format!("unknown byte unit {other:?}, use B, KiB, MiB or GiB")),
    };
    let value: f64 = num
        .parse()
        .map_err(|_| format!("bad byte count {text:?}"))?;
    if value < 0.0 {
        return Err(format!("byte count {text:?} is negative"));
    }
    Ok((value * mult as f64).round() as u64)
}

pub fn parse_bandwidth(text: &str) -> std::result::Result<f64, String> {
    let (num, unit) = split_unit(text.trim());
    let mult: f64 = match unit {
        "" => 1.0,
        "MB/s" => 1e6,
        "GB/s" => 1e9,
        "MiB/s" => (1u64 << 20) as f64,
        "GiB/s" => (1u64 << 30) as f64,
        other => {
            return Err(format!(
                "unknown bandwidth unit {other:?}, use MB/s, GB/s, MiB/s or GiB/s"
            ))
        }
    };
    let value: f64 = num
        .parse()
        .map_err(|_| format!("bad bandwidth {text:?}"))?;
    if value < 0.0 {
        return Err(format!("bandwidth {text:?} is negative"));
    }
    Ok(value * mult)
}

impl<'de> Deserialize<'de> for ByteSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ByteSize;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a byte count or a string like \"64 KiB\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ByteSize, E> {
                Ok(ByteSize(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ByteSize, E> {
                u64::try_from(v)
                    .map(ByteSize)
                    .map_err(|_| E::custom("byte count is negative"))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<ByteSize, E> {
                parse_byte_size(s).map(ByteSize).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Bandwidth;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("bytes per second or a string like \"25.8 GB/s\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Bandwidth, E> {
                Ok(Bandwidth(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Bandwidth, E> {
                self.visit_f64(v as f64)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Bandwidth, E> {
                if v < 0.0 {
                    return Err(E::custom("bandwidth is negative"));
                }
                Ok(Bandwidth(v))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Bandwidth, E> {
                parse_bandwidth(s).map(Bandwidth).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default)]
    pub graph: GraphSection,
    #[serde(default)]
    pub features: FeatureSection,
    #[serde(default)]
    pub gpu: GpuSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub host: HostSection,
    #[serde(default)]
    pub uvm: UvmSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    /// Load this file instead of generating. ".csr" is the binary layout;
    /// anything else parses as a text edge list and needs `nodes`.
    pub path: Option<PathBuf>,
    pub nodes: Option<u64>,
    pub avg_degree: Option<u64>,
    pub model: Option<DegreeModel>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSection {
    pub dim: Option<u64>,
    pub elem_size: Option<u32>,
    pub base_offset: Option<u64>,
    pub placement: Option<Placement>,
    pub fill: Option<Fill>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpuSection {
    pub num_sms: Option<u32>,
    pub threads_per_sm: Option<u32>,
    pub warp_size: Option<u32>,
    pub device_mem_capacity: Option<ByteSize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    /// "gen3" or "gen4". Sets the outstanding-read default.
    pub generation: Option<String>,
    pub wire_bandwidth: Option<Bandwidth>,
    pub max_outstanding_reads: Option<u64>,
    pub rtt: Option<f64>,
    pub header_bytes: Option<f64>,
    pub dma_setup_latency: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostSection {
    pub mem_bandwidth: Option<Bandwidth>,
    pub gather_efficiency: Option<f64>,
    pub worker_share_cap: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UvmSection {
    pub page_size: Option<ByteSize>,
    pub fault_latency: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub strategy: Option<String>,
    pub num_gpus: Option<u32>,
    pub resource_fraction: Option<f64>,
    pub pingpong_depth: Option<u32>,
    pub batch_size: Option<u64>,
    pub fanouts: Option<Vec<usize>>,
    pub train_base_seconds: Option<f64>,
    /// "linear" or "flat".
    pub train_scaling: Option<String>,
    pub cpu_only_factor: Option<f64>,
    pub sampler_seconds_per_node: Option<f64>,
    pub aggregate_link_cap: Option<Bandwidth>,
    pub weak_scaling: Option<bool>,
    pub histogram_sample_rows: Option<usize>,
    pub with_replacement: Option<bool>,
}

/// Where the graph came from, echoed into reports.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedGraph {
    /// "generated" or the path the graph was loaded from.
    pub source: String,
    pub nodes: u64,
    pub edges: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_degree: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<DegreeModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedFeatures {
    pub dim: u64,
    pub elem_size: u32,
    pub base_offset: u64,
    pub placement: Placement,
    pub fill: Fill,
}

/// Everything that determined a run, embedded in each JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub seed: u64,
    pub graph: ResolvedGraph,
    pub features: ResolvedFeatures,
    pub pipeline: PipelineConfig,
}

/// A fully resolved experiment: the inputs plus their report echo.
pub struct Experiment {
    pub graph: CsrGraph,
    pub table: FeatureTable,
    pub config: PipelineConfig,
    pub resolved: ResolvedConfig,
}

impl Experiment {
    /// Call after mutating `config` so reports echo the final values.
    pub fn sync_resolved(&mut self) {
        self.resolved.pipeline = self.config.clone();
    }
}

fn config_err(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

pub fn read_experiment_file(path: &Path) -> Result<ExperimentFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_err(format!("config {}: {e}", path.display())))
}

fn resolve_link(section: &LinkSection) -> Result<LinkParams> {
    let mut link = match section.generation.as_deref() {
        None => LinkParams::default(),
        Some(g) => match g.to_ascii_lowercase().as_str() {
            "gen3" | "3" => LinkParams::gen3(),
            "gen4" | "4" => LinkParams::gen4(),
            other => return Err(config_err(format!("unknown link generation {other:?}"))),
        },
    };
    if let Some(Bandwidth(v)) = section.wire_bandwidth {
        link.wire_bandwidth = v;
    }
    if let Some(v) = section.max_outstanding_reads {
        link.max_outstanding_reads = v;
    }
    if let Some(v) = section.rtt {
        link.rtt = v;
    }
    if let Some(v) = section.header_bytes {
        link.header_bytes = v;
    }
    if let Some(v) = section.dma_setup_latency {
        link.dma_setup_latency = v;
    }
    Ok(link)
}

fn resolve_scaling(text: Option<&str>) -> Result<TrainScaling> {
    match text {
        None => Ok(TrainScaling::Linear),
        Some("linear") => Ok(TrainScaling::Linear),
        Some("flat") => Ok(TrainScaling::Flat),
        Some(other) => Err(config_err(format!(
            "unknown train scaling {other:?}, use \"linear\" or \"flat\""
        ))),
    }
}

/// Builds the pipeline configuration without touching the graph. The
/// defaults mirror the calibrated fixture, so section-free files reproduce
/// the reference runs.
pub fn resolve_pipeline(file: &ExperimentFile) -> Result<PipelineConfig> {
    let gpu_default = GpuSpec::default();
    let gpu = GpuSpec {
        num_sms: file.gpu.num_sms.unwrap_or(gpu_default.num_sms),
        threads_per_sm: file.gpu.threads_per_sm.unwrap_or(gpu_default.threads_per_sm),
        warp_size: file.gpu.warp_size.unwrap_or(gpu_default.warp_size),
        device_mem_capacity: file
            .gpu
            .device_mem_capacity
            .map(|b| b.0)
            .unwrap_or(gpu_default.device_mem_capacity),
    };
    let link = resolve_link(&file.link)?;

    let mut config = PipelineConfig {
        gpu,
        link,
        batch_size: fixtures::BATCH_SIZE,
        fanouts: fixtures::FANOUTS.to_vec(),
        sampler_seconds_per_node: fixtures::SAMPLER_SECONDS_PER_NODE,
        histogram_sample_rows: fixtures::HISTOGRAM_SAMPLE_ROWS,
        ..PipelineConfig::default()
    };
    config.train.base_per_minibatch = fixtures::TRAIN_BASE_SECONDS;

    let p = &file.pipeline;
    if let Some(s) = &p.strategy {
        config.strategy = Strategy::from_str(s)?;
    }
    if let Some(v) = p.num_gpus {
        config.num_gpus = v;
    }
    if let Some(v) = p.resource_fraction {
        config.resource_fraction = v;
    }
    if let Some(v) = p.pingpong_depth {
        config.pingpong_depth = v;
    }
    if let Some(v) = p.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = &p.fanouts {
        config.fanouts = v.clone();
    }
    if let Some(v) = p.train_base_seconds {
        config.train.base_per_minibatch = v;
    }
    config.train.scaling = resolve_scaling(p.train_scaling.as_deref())?;
    if let Some(v) = p.cpu_only_factor {
        config.train.cpu_only_factor = v;
    }
    if let Some(v) = p.sampler_seconds_per_node {
        config.sampler_seconds_per_node = v;
    }
    if let Some(Bandwidth(v)) = p.aggregate_link_cap {
        config.aggregate_link_cap = v;
    }
    if let Some(v) = p.weak_scaling {
        config.weak_scaling = v;
    }
    if let Some(v) = p.histogram_sample_rows {
        config.histogram_sample_rows = v;
    }
    if let Some(v) = p.with_replacement {
        config.with_replacement = v;
    }

    let h = &file.host;
    if let Some(Bandwidth(v)) = h.mem_bandwidth {
        config.host.mem_bandwidth = v;
    }
    if let Some(v) = h.gather_efficiency {
        config.host.gather_efficiency = v;
    }
    if let Some(v) = h.worker_share_cap {
        config.host.worker_share_cap = v;
    }

    let u = &file.uvm;
    if let Some(ByteSize(v)) = u.page_size {
        config.uvm.page_size = v;
    }
    if let Some(v) = u.fault_latency {
        config.uvm.fault_latency = v;
    }

    Ok(config)
}

fn resolve_graph(section: &GraphSection) -> Result<(CsrGraph, ResolvedGraph)> {
    match &section.path {
        Some(path) => {
            let graph = if path.extension().is_some_and(|e| e == "csr") {
                load_csr(path)?
            } else {
                let nodes = section.nodes.ok_or_else(|| {
                    config_err("graph.nodes is required when loading a text edge list".into())
                })?;
                load_edge_list(path, nodes)?
            };
            let resolved = ResolvedGraph {
                source: path.display().to_string(),
                nodes: graph.num_nodes(),
                edges: graph.num_edges(),
                avg_degree: None,
                model: None,
                seed: None,
            };
            Ok((graph, resolved))
        }
        None => {
            let nodes = section.nodes.unwrap_or(fixtures::NUM_NODES);
            let avg_degree = section.avg_degree.unwrap_or(fixtures::AVG_DEGREE);
            let model = section.model.unwrap_or(DegreeModel::Uniform);
            let seed = section.seed.unwrap_or(fixtures::GRAPH_SEED);
            let graph = generate_graph(nodes, avg_degree, model, seed)?;
            let resolved = ResolvedGraph {
                source: "generated".into(),
                nodes,
                edges: graph.num_edges(),
                avg_degree: Some(avg_degree),
                model: Some(model),
                seed: Some(seed),
            };
            Ok((graph, resolved))
        }
    }
}

/// Loads (or defaults) an experiment file and materializes graph, feature
/// table, and pipeline configuration. `seed` is the epoch seed; the graph
/// generator seed lives in the file.
pub fn load_experiment(path: Option<&Path>, seed: u64) -> Result<Experiment> {
    let file = match path {
        Some(p) => read_experiment_file(p)?,
        None => ExperimentFile::default(),
    };
    let config = resolve_pipeline(&file)?;
    let (graph, resolved_graph) = resolve_graph(&file.graph)?;

    let f = &file.features;
    let dim = f.dim.unwrap_or(fixtures::FEAT_DIM);
    let elem_size = f.elem_size.unwrap_or(fixtures::ELEM_SIZE);
    let base_offset = f.base_offset.unwrap_or(0);
    let placement = f.placement.unwrap_or(Placement::HostMapped);
    let fill = f.fill.unwrap_or(Fill::None);
    // Host tables are not bounded by device memory; the all-in-gpu capacity
    // check happens at simulation time instead.
    let capacity = match placement {
        Placement::Device => config.gpu.device_mem_capacity,
        _ => u64::MAX,
    };
    let table = attach_features(
        graph.num_nodes(),
        dim,
        elem_size,
        base_offset,
        placement,
        fill,
        capacity,
    )?;

    let resolved = ResolvedConfig {
        seed,
        graph: resolved_graph,
        features: ResolvedFeatures {
            dim,
            elem_size,
            base_offset,
            placement,
            fill,
        },
        pipeline: config.clone(),
    };
    Ok(Experiment {
        graph,
        table,
        config,
        resolved,
    })
}
