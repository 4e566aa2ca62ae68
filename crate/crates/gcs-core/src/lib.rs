//! Models of the data path that feeds GPUs during minibatch training on large
//! graphs whose node features live in host memory.
//!
//! The library covers four layers of that path and a simulator that ties them
//! together:
//!
//! * [`graph`]: CSR graphs, synthetic generators, and node feature tables.
//! * [`sampler`]: layered neighborhood sampling and minibatch planning.
//! * [`gather`]: warp-level gather planning, the circular-shift alignment
//!   stage, and coalescing of element accesses into interconnect requests.
//! * [`link`]: bandwidth and latency bounds for the host link, block-copy
//!   and page-fault cost models, and SM provisioning arithmetic.
//! * [`pipeline`]: a deterministic discrete-event simulation of the
//!   sampler / producer / consumer pipeline under different feature
//!   transfer strategies, plus parameter sweeps.
//!
//! Everything is deterministic: the same inputs and seeds produce identical
//! plans, traces, and reports. With the default `parallel` feature the
//! embarrassingly parallel parts (per-minibatch sampling, per-warp trace
//! evaluation, independent sweep points) run on rayon; the sequential
//! fallbacks produce bit-identical results.

pub mod error;
pub mod fixtures;
pub mod gather;
pub mod graph;
pub mod link;
pub mod pipeline;
pub mod sampler;

pub(crate) mod rng;

pub use error::{Error, Result};
