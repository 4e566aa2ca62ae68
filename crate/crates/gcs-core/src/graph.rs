//! CSR graphs, synthetic generators, and node feature tables.
//!
//! Graphs are stored as `row_offsets` / `col_indices` in the usual compressed
//! sparse row layout. Duplicate edges are preserved: they act as distinct
//! neighbor slots during sampling. Column indices are sorted within each row.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub type NodeId = u64;

/// GPU cacheline size in bytes; feature rows may start anywhere inside one.
pub const CACHELINE_BYTES: u64 = 128;

/// Device memory capacity used when a config does not override it (24 GiB).
pub const DEFAULT_DEVICE_CAPACITY: u64 = 24 * (1 << 30);

const CSR_MAGIC: &[u8; 4] = b"CSR1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    num_nodes: u64,
    row_offsets: Vec<u64>,
    col_indices: Vec<NodeId>,
}

impl CsrGraph {
    pub fn empty(num_nodes: u64) -> Self {
        CsrGraph {
            num_nodes,
            row_offsets: vec![0; num_nodes as usize + 1],
            col_indices: Vec::new(),
        }
    }

    /// Builds a CSR from an edge list. Edges keep their multiplicity and each
    /// row ends up sorted. Fails if any endpoint is out of range.
    pub fn from_edges(num_nodes: u64, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        for &(src, dst) in edges {
            for id in [src, dst] {
                if id >= num_nodes {
                    return Err(Error::NodeOutOfRange { id, num_nodes });
                }
            }
        }
        let n = num_nodes as usize;
        let mut degrees = vec![0u64; n];
        for &(src, _) in edges {
            degrees[src as usize] += 1;
        }
        let mut row_offsets = vec![0u64; n + 1];
        for i in 0..n {
            row_offsets[i + 1] = row_offsets[i] + degrees[i];
        }
        let mut col_indices = vec![0 as NodeId; edges.len()];
        let mut cursor = row_offsets.clone();
        for &(src, dst) in edges {
            let c = &mut cursor[src as usize];
            col_indices[*c as usize] = dst;
            *c += 1;
        }
        for i in 0..n {
            col_indices[row_offsets[i] as usize..row_offsets[i + 1] as usize].sort_unstable();
        }
        Ok(CsrGraph {
            num_nodes,
            row_offsets,
            col_indices,
        })
    }

    pub fn num_nodes(&self) -> u64 {
        self.num_nodes
    }

    pub fn num_edges(&self) -> u64 {
        self.col_indices.len() as u64
    }

    pub fn degree(&self, node: NodeId) -> u64 {
        self.row_offsets[node as usize + 1] - self.row_offsets[node as usize]
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        let lo = self.row_offsets[node as usize] as usize;
        let hi = self.row_offsets[node as usize + 1] as usize;
        &self.col_indices[lo..hi]
    }

    pub fn max_degree(&self) -> u64 {
        (0..self.num_nodes).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn row_offsets(&self) -> &[u64] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[NodeId] {
        &self.col_indices
    }
}

/// Loads a whitespace-separated "src dst" edge list. `#` starts a comment,
/// blank lines are skipped, IDs must be `< num_nodes`.
pub fn load_edge_list(path: impl AsRef<Path>, num_nodes: u64) -> Result<CsrGraph> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut fields = text.split_whitespace();
        let (src, dst) = match (fields.next(), fields.next()) {
            (None, _) => continue,
            (Some(a), Some(b)) => (a, b),
            (Some(_), None) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected two node ids".into(),
                })
            }
        };
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: "trailing fields after edge".into(),
            });
        }
        let parse = |s: &str| -> Result<NodeId> {
            s.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad node id {s:?}"),
            })
        };
        edges.push((parse(src)?, parse(dst)?));
    }
    CsrGraph::from_edges(num_nodes, &edges)
}

/// Writes one "src dst" line per CSR entry, duplicates included.
pub fn save_edge_list(graph: &CsrGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for src in 0..graph.num_nodes() {
        for &dst in graph.neighbors(src) {
            writeln!(w, "{src} {dst}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Binary CSR layout: magic "CSR1", then num_nodes and num_edges as
/// little-endian u64, then row_offsets (num_nodes + 1 u64) and col_indices
/// (num_edges u64).
pub fn save_csr(graph: &CsrGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CSR_MAGIC)?;
    w.write_all(&graph.num_nodes.to_le_bytes())?;
    w.write_all(&graph.num_edges().to_le_bytes())?;
    for &v in &graph.row_offsets {
        w.write_all(&v.to_le_bytes())?;
    }
    for &v in &graph.col_indices {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_csr(path: impl AsRef<Path>) -> Result<CsrGraph> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for CSR header".into()))?;
    if &magic != CSR_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            magic, CSR_MAGIC
        )));
    }
    let read_u64 = |r: &mut BufReader<File>| -> Result<u64> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)
            .map_err(|_| Error::Format("truncated CSR file".into()))?;
        Ok(u64::from_le_bytes(buf))
    };
    let num_nodes = read_u64(&mut r)?;
    let num_edges = read_u64(&mut r)?;
    let mut row_offsets = Vec::with_capacity(num_nodes as usize + 1);
    for _ in 0..=num_nodes {
        row_offsets.push(read_u64(&mut r)?);
    }
    let mut col_indices = Vec::with_capacity(num_edges as usize);
    for _ in 0..num_edges {
        col_indices.push(read_u64(&mut r)?);
    }
    if row_offsets[0] != 0 || *row_offsets.last().unwrap() != num_edges {
        return Err(Error::Format("row offsets do not cover the edge array".into()));
    }
    if row_offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Format("row offsets are not non-decreasing".into()));
    }
    if let Some(&id) = col_indices.iter().find(|&&c| c >= num_nodes) {
        return Err(Error::NodeOutOfRange { id, num_nodes });
    }
    Ok(CsrGraph {
        num_nodes,
        row_offsets,
        col_indices,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeModel {
    Uniform,
    PowerLaw,
}

/// Generates a synthetic graph with roughly `num_nodes * avg_degree` directed
/// adjacency entries.
///
/// `Uniform` draws that many random edges (no self loops), giving rows with
/// close-to-Poisson sizes. `PowerLaw` grows the graph by preferential
/// attachment with `max(1, avg_degree / 2)` links per arriving node and
/// stores both directions, so early nodes turn into hubs.
pub fn generate_graph(
    num_nodes: u64,
    avg_degree: u64,
    model: DegreeModel,
    seed: u64,
) -> Result<CsrGraph> {
    if avg_degree >= num_nodes.max(1) {
        return Err(Error::InvalidParameter(format!(
            "avg_degree {avg_degree} must be smaller than num_nodes {num_nodes}"
        )));
    }
    if avg_degree == 0 {
        return Ok(CsrGraph::empty(num_nodes));
    }
    let mut rng = stream_rng(&[seed, model as u64, num_nodes, avg_degree]);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    match model {
        DegreeModel::Uniform => {
            let m = num_nodes * avg_degree;
            edges.reserve(m as usize);
            for _ in 0..m {
                let src = rng.gen_range(0..num_nodes);
                let mut dst = rng.gen_range(0..num_nodes);
                while dst == src && num_nodes > 1 {
                    dst = rng.gen_range(0..num_nodes);
                }
                edges.push((src, dst));
            }
        }
        DegreeModel::PowerLaw => {
            let m = (avg_degree / 2).max(1) as usize;
            // Endpoints of existing edges, repeated; picking uniformly from
            // this list is attachment proportional to current degree.
            let mut targets: Vec<NodeId> = Vec::new();
            let mut chosen: Vec<NodeId> = Vec::with_capacity(m);
            let mut seen: HashSet<NodeId> = HashSet::with_capacity(m * 2);
            for v in 1..num_nodes {
                let links = m.min(v as usize);
                chosen.clear();
                seen.clear();
                while chosen.len() < links {
                    let t = if targets.is_empty() {
                        rng.gen_range(0..v)
                    } else {
                        targets[rng.gen_range(0..targets.len())]
                    };
                    if seen.insert(t) {
                        chosen.push(t);
                    }
                }
                for &t in &chosen {
                    edges.push((v, t));
                    edges.push((t, v));
                    targets.push(v);
                    targets.push(t);
                }
            }
        }
    }
    CsrGraph::from_edges(num_nodes, &edges)
}

/// Where a feature table lives for the purposes of the transfer strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Pageable or pinned host memory reached through explicit copies.
    HostShared,
    /// Host memory mapped into the device address space.
    HostMapped,
    /// Resident in device memory.
    Device,
}

/// How (and whether) element values are materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fill {
    /// Geometry only; no data array. Enough for planning and simulation.
    None,
    /// Element k of row r holds the global element index r * feat_dim + k,
    /// masked to the element width. Lets tests predict gather output.
    Sequential,
    /// ChaCha-generated values masked to the element width.
    Random { seed: u64 },
}

/// A dense `num_nodes x feat_dim` table of `elem_size`-byte elements starting
/// `base_offset` bytes into its allocation. Rows are unpadded, so row r
/// starts at `base_offset + r * feat_dim * elem_size` and rows after the
/// first are generally not cacheline aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    num_nodes: u64,
    feat_dim: u64,
    elem_size: u32,
    base_offset: u64,
    placement: Placement,
    fill: Fill,
    data: Option<Vec<u64>>,
}

pub fn attach_features(
    num_nodes: u64,
    feat_dim: u64,
    elem_size: u32,
    base_offset: u64,
    placement: Placement,
    fill: Fill,
    device_capacity: u64,
) -> Result<FeatureTable> {
    if !matches!(elem_size, 1 | 2 | 4 | 8) {
        return Err(Error::InvalidParameter(format!(
            "elem_size {elem_size} not one of 1, 2, 4, 8"
        )));
    }
    if feat_dim == 0 {
        return Err(Error::InvalidParameter("feat_dim must be at least 1".into()));
    }
    if base_offset >= CACHELINE_BYTES {
        return Err(Error::InvalidParameter(format!(
            "base_offset {base_offset} must be below {CACHELINE_BYTES}"
        )));
    }
    let total_bytes = num_nodes * feat_dim * elem_size as u64;
    if placement == Placement::Device && total_bytes > device_capacity {
        return Err(Error::DeviceCapacity {
            required: total_bytes,
            capacity: device_capacity,
        });
    }
    let mask = elem_mask(elem_size);
    let data = match fill {
        Fill::None => None,
        Fill::Sequential => {
            let len = (num_nodes * feat_dim) as usize;
            Some((0..len as u64).map(|e| e & mask).collect())
        }
        Fill::Random { seed } => {
            let len = (num_nodes * feat_dim) as usize;
            let mut rng = stream_rng(&[seed, num_nodes, feat_dim]);
            Some((0..len).map(|_| rng.gen::<u64>() & mask).collect())
        }
    };
    Ok(FeatureTable {
        num_nodes,
        feat_dim,
        elem_size,
        base_offset,
        placement,
        fill,
        data,
    })
}

fn elem_mask(elem_size: u32) -> u64 {
    if elem_size == 8 {
        u64::MAX
    } else {
        (1u64 << (elem_size * 8)) - 1
    }
}

impl FeatureTable {
    pub fn num_nodes(&self) -> u64 {
        self.num_nodes
    }

    pub fn feat_dim(&self) -> u64 {
        self.feat_dim
    }

    pub fn elem_size(&self) -> u32 {
        self.elem_size
    }

    pub fn base_offset(&self) -> u64 {
        self.base_offset
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn row_stride_bytes(&self) -> u64 {
        self.feat_dim * self.elem_size as u64
    }

    pub fn total_bytes(&self) -> u64 {
        self.num_nodes * self.row_stride_bytes()
    }

    pub fn num_elements(&self) -> u64 {
        self.num_nodes * self.feat_dim
    }

    /// Byte address of the first element of row `node`.
    pub fn row_address(&self, node: NodeId) -> u64 {
        self.base_offset + node * self.row_stride_bytes()
    }

    /// Byte address of a global element index.
    pub fn element_address(&self, element: u64) -> u64 {
        self.base_offset + element * self.elem_size as u64
    }

    pub fn data(&self) -> Option<&[u64]> {
        self.data.as_deref()
    }

    /// Same table with a different row width; data is refilled per the
    /// original fill policy. Used by feature-dimension sweeps.
    pub fn with_feat_dim(&self, feat_dim: u64, device_capacity: u64) -> Result<FeatureTable> {
        attach_features(
            self.num_nodes,
            feat_dim,
            self.elem_size,
            self.base_offset,
            self.placement,
            self.fill,
            device_capacity,
        )
    }

    /// Number of distinct `page_size`-byte pages covering the given rows.
    pub fn touched_pages(&self, nodes: &[NodeId], page_size: u64) -> u64 {
        assert!(page_size > 0, "page_size must be positive");
        let stride = self.row_stride_bytes();
        if stride == 0 {
            return 0;
        }
        let mut pages: Vec<u64> = Vec::with_capacity(nodes.len() * 2);
        for &n in nodes {
            let lo = self.row_address(n) / page_size;
            let hi = (self.row_address(n) + stride - 1) / page_size;
            pages.extend(lo..=hi);
        }
        pages.sort_unstable();
        pages.dedup();
        pages.len() as u64
    }
}
