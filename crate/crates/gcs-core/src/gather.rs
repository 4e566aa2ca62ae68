//! Planning and traffic analysis for sparse feature-row gathers.
//!
//! A gather copies the feature rows named by a minibatch's unique node list
//! into a packed buffer. We model it at thread granularity: thread `i` of the
//! kernel copies one element, threads are grouped into warps of
//! [`WARP_SIZE`], and each warp's loads are served by the memory system in
//! 32-byte sectors ([`SECTOR_BYTES`]) grouped into 128-byte cachelines.
//! Reads that cross the interconnect become one request per touched
//! cacheline, sized by the span of touched sectors within it.
//!
//! [`plan_offsets`] builds the per-thread source/destination map.
//! [`apply_circular_shift`] rotates each row's assignments so warps read
//! warp-aligned source blocks, which shrinks the sector footprint when the
//! row length is not a multiple of the warp size. [`coalesce_trace`] turns a
//! plan into the request stream it would put on the wire.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{FeatureTable, NodeId, CACHELINE_BYTES};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Threads per warp. Plans are chunked into warps of this size.
pub const WARP_SIZE: usize = 32;

/// Granularity of a memory-system read: requests start and end on 32-byte
/// sector boundaries.
pub const SECTOR_BYTES: u64 = 32;

const SECTORS_PER_LINE: u64 = CACHELINE_BYTES / SECTOR_BYTES;

/// Below this many pairs the parallel entry points run sequentially; the
/// split/join overhead dwarfs the work.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 1 << 13;

/// One thread's assignment: copy source element `src_offset` of the feature
/// table to element `dst_offset` of the packed output buffer. Offsets are in
/// elements, not bytes. `warp_id` and `lane` locate the thread and never
/// change once planned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OffsetPair {
    pub dst_offset: u64,
    pub src_offset: u64,
    pub warp_id: u32,
    pub lane: u32,
}

/// Builds the element map for gathering the rows in `idx_list`, in linear
/// thread order: thread `i` writes destination element `i`, reading element
/// `i % feat_dim` of row `idx_list[i / feat_dim]`.
///
/// `feat_dim` and `warp_size` must be positive.
pub fn plan_offsets(idx_list: &[NodeId], feat_dim: u64, warp_size: usize) -> Vec<OffsetPair> {
    assert!(feat_dim > 0, "feat_dim must be positive");
    assert!(warp_size > 0, "warp_size must be positive");
    let ws = warp_size as u64;
    let total = idx_list.len() as u64 * feat_dim;
    let mut pairs = Vec::with_capacity(total as usize);
    for i in 0..total {
        let row = (i / feat_dim) as usize;
        let offset = i % feat_dim;
        pairs.push(OffsetPair {
            dst_offset: i,
            src_offset: idx_list[row] * feat_dim + offset,
            warp_id: (i / ws) as u32,
            lane: (i % ws) as u32,
        });
    }
    pairs
}

/// Rotates each row's thread assignments so that, away from row boundaries,
/// a warp reads a contiguous source block starting on a warp-aligned element
/// index. Each row is shifted by `(dst_row_start - src_row_start) mod
/// warp_size` elements, wrapping within the row, so the set of elements a
/// row's threads read is unchanged; only which thread reads which element
/// moves.
///
/// Returns the plan unchanged when `feat_dim <= warp_size` or `feat_dim` is
/// a multiple of `warp_size`: in both cases the unrotated plan already has
/// the alignment the rotation would create.
///
/// Expects pairs fresh from [`plan_offsets`]; applying it twice rotates rows
/// a second time.
pub fn apply_circular_shift(
    pairs: &[OffsetPair],
    feat_dim: u64,
    warp_size: usize,
) -> Vec<OffsetPair> {
    assert!(feat_dim > 0, "feat_dim must be positive");
    assert!(warp_size > 0, "warp_size must be positive");
    let feat = feat_dim as i64;
    let ws = warp_size as i64;
    if feat <= ws || feat % ws == 0 {
        return pairs.to_vec();
    }
    pairs
        .iter()
        .map(|p| {
            let dst = p.dst_offset as i64;
            let src = p.src_offset as i64;
            let offset = dst % feat;
            let dst_start = dst - offset;
            let src_start = src - offset;
            let mut diff = (dst_start - src_start) % ws;
            if diff < 0 {
                diff += ws;
            }
            let mut new_dst = dst + diff;
            if new_dst >= dst_start + feat {
                new_dst -= feat;
            } else if new_dst < dst_start {
                new_dst += feat;
            }
            let mut new_src = src + diff;
            if new_src >= src_start + feat {
                new_src -= feat;
            } else if new_src < src_start {
                new_src += feat;
            }
            OffsetPair {
                dst_offset: new_dst as u64,
                src_offset: new_src as u64,
                warp_id: p.warp_id,
                lane: p.lane,
            }
        })
        .collect()
}

/// Executes a plan against materialized table data. Element `dst_offset` of
/// the result holds source element `src_offset`; the result length equals the
/// plan length.
pub fn reference_gather(table: &FeatureTable, pairs: &[OffsetPair]) -> Result<Vec<u64>> {
    let data = table.data().ok_or_else(|| {
        Error::InvalidParameter("feature table has no materialized data".into())
    })?;
    let mut out = vec![0u64; pairs.len()];
    for p in pairs {
        if p.src_offset >= data.len() as u64 {
            return Err(Error::ElementOutOfRange {
                offset: p.src_offset,
                len: data.len() as u64,
            });
        }
        if p.dst_offset >= out.len() as u64 {
            return Err(Error::ElementOutOfRange {
                offset: p.dst_offset,
                len: out.len() as u64,
            });
        }
        out[p.dst_offset as usize] = data[p.src_offset as usize];
    }
    Ok(out)
}

/// How the touched sectors of one cacheline become requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SectorPolicy {
    /// One request spanning min..max touched sector. Interior gaps ride
    /// along as over-fetch.
    #[default]
    SpanMinMax,
    /// One request per maximal run of consecutive touched sectors.
    SplitRuns,
}

/// One read transaction: `payload_bytes` of data starting at
/// `start_address`. Addresses are sector aligned and payloads are sector
/// multiples, at most one cacheline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InterconnectRequest {
    #[serde(rename = "addr")]
    pub start_address: u64,
    #[serde(rename = "payload")]
    pub payload_bytes: u32,
}

/// The request stream of one gather. `total_useful` counts bytes the threads
/// asked for, one per thread per byte, so duplicate rows count every time;
/// `total_payload` counts bytes on the wire, which can exceed the useful
/// bytes (over-fetch from misalignment) or fall short of them (two threads
/// of one warp reading the same sector).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessTrace {
    pub requests: Vec<InterconnectRequest>,
    pub total_payload: u64,
    pub total_useful: u64,
}

impl AccessTrace {
    /// Request count keyed by payload size in bytes.
    pub fn payload_histogram(&self) -> BTreeMap<u32, u64> {
        let mut hist = BTreeMap::new();
        for r in &self.requests {
            *hist.entry(r.payload_bytes).or_insert(0) += 1;
        }
        hist
    }
}

/// [`coalesce_trace_with`] under the default [`SectorPolicy::SpanMinMax`].
pub fn coalesce_trace(table: &FeatureTable, pairs: &[OffsetPair]) -> AccessTrace {
    coalesce_trace_with(table, pairs, SectorPolicy::SpanMinMax)
}

/// Coalesces a plan into interconnect requests: per warp, collect the
/// 32-byte sectors its loads touch, group them by 128-byte cacheline, and
/// emit requests per `policy`. Requests come out in warp order, ascending by
/// address within a warp. Runs warps in parallel for large plans when the
/// `parallel` feature is on; output is identical to the sequential path.
pub fn coalesce_trace_with(
    table: &FeatureTable,
    pairs: &[OffsetPair],
    policy: SectorPolicy,
) -> AccessTrace {
    #[cfg(feature = "parallel")]
    {
        if pairs.len() >= PAR_THRESHOLD {
            let warps: Vec<&[OffsetPair]> =
                pairs.chunk_by(|a, b| a.warp_id == b.warp_id).collect();
            let per_warp: Vec<Vec<InterconnectRequest>> = warps
                .par_iter()
                .map(|w| {
                    let mut reqs = Vec::new();
                    warp_requests(table, w, policy, &mut reqs);
                    reqs
                })
                .collect();
            let requests: Vec<InterconnectRequest> =
                per_warp.into_iter().flatten().collect();
            return finish_trace(table, pairs.len(), requests);
        }
    }
    coalesce_trace_seq(table, pairs, policy)
}

/// Sequential twin of [`coalesce_trace_with`].
pub fn coalesce_trace_seq(
    table: &FeatureTable,
    pairs: &[OffsetPair],
    policy: SectorPolicy,
) -> AccessTrace {
    let mut requests = Vec::new();
    for warp in pairs.chunk_by(|a, b| a.warp_id == b.warp_id) {
        warp_requests(table, warp, policy, &mut requests);
    }
    finish_trace(table, pairs.len(), requests)
}

fn finish_trace(
    table: &FeatureTable,
    num_pairs: usize,
    requests: Vec<InterconnectRequest>,
) -> AccessTrace {
    let total_payload = requests.iter().map(|r| r.payload_bytes as u64).sum();
    AccessTrace {
        requests,
        total_payload,
        total_useful: num_pairs as u64 * table.elem_size() as u64,
    }
}

fn warp_requests(
    table: &FeatureTable,
    warp: &[OffsetPair],
    policy: SectorPolicy,
    out: &mut Vec<InterconnectRequest>,
) {
    let elem = table.elem_size() as u64;
    let mut sectors: Vec<u64> = Vec::with_capacity(warp.len() * 2);
    for p in warp {
        let first = table.element_address(p.src_offset);
        let last = first + elem - 1;
        // elem <= 8 < SECTOR_BYTES, so an element touches at most two sectors.
        sectors.push(first / SECTOR_BYTES);
        sectors.push(last / SECTOR_BYTES);
    }
    sectors.sort_unstable();
    sectors.dedup();

    let mut i = 0;
    while i < sectors.len() {
        let line = sectors[i] / SECTORS_PER_LINE;
        let mut j = i + 1;
        while j < sectors.len() && sectors[j] / SECTORS_PER_LINE == line {
            j += 1;
        }
        match policy {
            SectorPolicy::SpanMinMax => {
                let lo = sectors[i];
                let hi = sectors[j - 1];
                out.push(InterconnectRequest {
                    start_address: lo * SECTOR_BYTES,
                    payload_bytes: ((hi - lo + 1) * SECTOR_BYTES) as u32,
                });
            }
            SectorPolicy::SplitRuns => {
                let mut k = i;
                while k < j {
                    let start = sectors[k];
                    let mut end = start;
                    let mut m = k + 1;
                    while m < j && sectors[m] == end + 1 {
                        end = sectors[m];
                        m += 1;
                    }
                    out.push(InterconnectRequest {
                        start_address: start * SECTOR_BYTES,
                        payload_bytes: ((end - start + 1) * SECTOR_BYTES) as u32,
                    });
                    k = m;
                }
            }
        }
        i = j;
    }
}
