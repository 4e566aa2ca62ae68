//! Layered neighborhood sampling and minibatch planning.
//!
//! A minibatch starts from a set of seed nodes and expands layer by layer:
//! layer k samples up to `fanouts[k]` neighbors without replacement for every
//! node in the current frontier, and the next frontier is the deduplicated
//! union of everything reached so far. Every `(node, layer, minibatch)`
//! triple draws from its own random substream, so plans do not depend on
//! iteration order and whole epochs can be planned in parallel.

use std::collections::HashSet;

use rand::Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{CsrGraph, NodeId};
use crate::rng::stream_rng;

/// Everything the producer needs to gather features for one minibatch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinibatchPlan {
    pub seeds: Vec<NodeId>,
    /// Sampled node IDs per layer, outermost (closest to the seeds) first.
    /// Entries keep their multiplicity; a node sampled from two frontier
    /// nodes appears twice.
    pub layers: Vec<Vec<NodeId>>,
    /// Seeds plus all sampled nodes, deduplicated in first-seen order.
    pub unique_nodes: Vec<NodeId>,
}

impl MinibatchPlan {
    /// Bytes the producer must gather: one feature row per unique node.
    pub fn gather_bytes(&self, row_stride_bytes: u64) -> u64 {
        self.unique_nodes.len() as u64 * row_stride_bytes
    }

    /// Number of sampling draws that produced this plan (seeds included).
    pub fn total_sampled(&self) -> u64 {
        self.seeds.len() as u64 + self.layers.iter().map(|l| l.len() as u64).sum::<u64>()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SampleOptions {
    /// Draw neighbors with replacement instead of the default without.
    pub with_replacement: bool,
}

/// Samples a multi-layer neighborhood around `seeds`.
pub fn sample_layers(
    graph: &CsrGraph,
    seeds: &[NodeId],
    fanouts: &[usize],
    seed: u64,
) -> Result<MinibatchPlan> {
    sample_layers_with(graph, seeds, fanouts, seed, SampleOptions::default(), 0)
}

/// Like [`sample_layers`] but with explicit options and the minibatch index
/// used for substream derivation. `minibatch_stream` plans are reproducible
/// standalone by passing the same epoch seed and index here.
pub fn sample_layers_with(
    graph: &CsrGraph,
    seeds: &[NodeId],
    fanouts: &[usize],
    seed: u64,
    opts: SampleOptions,
    minibatch_index: u64,
) -> Result<MinibatchPlan> {
    for &s in seeds {
        if s >= graph.num_nodes() {
            return Err(Error::NodeOutOfRange {
                id: s,
                num_nodes: graph.num_nodes(),
            });
        }
    }
    let mut seen: HashSet<NodeId> = HashSet::with_capacity(seeds.len() * 2);
    let mut unique: Vec<NodeId> = Vec::with_capacity(seeds.len());
    for &s in seeds {
        if seen.insert(s) {
            unique.push(s);
        }
    }
    let mut frontier = unique.clone();
    let mut layers: Vec<Vec<NodeId>> = Vec::with_capacity(fanouts.len());
    for (layer_idx, &fanout) in fanouts.iter().enumerate() {
        let mut layer: Vec<NodeId> = Vec::new();
        for &node in &frontier {
            let nbrs = graph.neighbors(node);
            if nbrs.is_empty() || fanout == 0 {
                continue;
            }
            if !opts.with_replacement && nbrs.len() <= fanout {
                layer.extend_from_slice(nbrs);
                continue;
            }
            let mut rng = stream_rng(&[seed, minibatch_index, layer_idx as u64, node]);
            if opts.with_replacement {
                for _ in 0..fanout {
                    layer.push(nbrs[rng.gen_range(0..nbrs.len())]);
                }
            } else {
                for i in rand::seq::index::sample(&mut rng, nbrs.len(), fanout) {
                    layer.push(nbrs[i]);
                }
            }
        }
        for &v in &layer {
            if seen.insert(v) {
                unique.push(v);
            }
        }
        frontier = unique.clone();
        layers.push(layer);
    }
    Ok(MinibatchPlan {
        seeds: seeds.to_vec(),
        layers,
        unique_nodes: unique,
    })
}

/// Iterator over one epoch of minibatch plans: a seeded permutation of all
/// node IDs cut into `batch_size` chunks (the last may be short).
pub struct MinibatchStream<'g> {
    graph: &'g CsrGraph,
    order: Vec<NodeId>,
    batch_size: u64,
    fanouts: Vec<usize>,
    epoch_seed: u64,
    opts: SampleOptions,
    next: u64,
}

const PERM_STREAM: u64 = 0x7065_726d; // "perm"

pub fn minibatch_stream<'g>(
    graph: &'g CsrGraph,
    batch_size: u64,
    fanouts: &[usize],
    epoch_seed: u64,
) -> Result<MinibatchStream<'g>> {
    minibatch_stream_with(graph, batch_size, fanouts, epoch_seed, SampleOptions::default())
}

pub fn minibatch_stream_with<'g>(
    graph: &'g CsrGraph,
    batch_size: u64,
    fanouts: &[usize],
    epoch_seed: u64,
    opts: SampleOptions,
) -> Result<MinibatchStream<'g>> {
    if batch_size == 0 {
        return Err(Error::InvalidParameter("batch_size must be at least 1".into()));
    }
    let mut order: Vec<NodeId> = (0..graph.num_nodes()).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut stream_rng(&[epoch_seed, PERM_STREAM]));
    Ok(MinibatchStream {
        graph,
        order,
        batch_size,
        fanouts: fanouts.to_vec(),
        epoch_seed,
        opts,
        next: 0,
    })
}

impl MinibatchStream<'_> {
    pub fn num_minibatches(&self) -> u64 {
        (self.order.len() as u64).div_ceil(self.batch_size)
    }

    /// Seed slice of minibatch `index` in this epoch's permutation.
    pub fn seeds_of(&self, index: u64) -> &[NodeId] {
        let lo = (index * self.batch_size) as usize;
        let hi = ((index + 1) * self.batch_size).min(self.order.len() as u64) as usize;
        &self.order[lo..hi]
    }

    /// Plan for minibatch `index`, independent of iterator position. Lets
    /// callers process an epoch without holding every plan at once.
    pub fn plan_at(&self, index: u64) -> MinibatchPlan {
        sample_layers_with(
            self.graph,
            self.seeds_of(index),
            &self.fanouts,
            self.epoch_seed,
            self.opts,
            index,
        )
        .expect("permutation seeds are in range")
    }
}

impl Iterator for MinibatchStream<'_> {
    type Item = MinibatchPlan;

    fn next(&mut self) -> Option<MinibatchPlan> {
        if self.next >= self.num_minibatches() {
            return None;
        }
        let plan = self.plan_at(self.next);
        self.next += 1;
        Some(plan)
    }
}

/// All plans of one epoch. Parallel over minibatches when the `parallel`
/// feature is on; identical output either way.
pub fn epoch_plans(
    graph: &CsrGraph,
    batch_size: u64,
    fanouts: &[usize],
    epoch_seed: u64,
) -> Result<Vec<MinibatchPlan>> {
    let stream = minibatch_stream(graph, batch_size, fanouts, epoch_seed)?;
    #[cfg(feature = "parallel")]
    {
        let n = stream.num_minibatches();
        Ok((0..n).into_par_iter().map(|i| stream.plan_at(i)).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(stream.collect())
    }
}

/// Sequential version of [`epoch_plans`]; the fallback when the `parallel`
/// feature is off and the baseline the benchmarks compare against.
pub fn epoch_plans_seq(
    graph: &CsrGraph,
    batch_size: u64,
    fanouts: &[usize],
    epoch_seed: u64,
) -> Result<Vec<MinibatchPlan>> {
    Ok(minibatch_stream(graph, batch_size, fanouts, epoch_seed)?.collect())
}
