//! Desk-scale modeling toolkit for mini-batch GNN training accelerators.
//!
//! The crate is organized around the stages of one training iteration:
//!
//! - [`graph`]: graph storage, COO conversion, degree-normalized edge
//!   weights, file formats, and synthetic graph generation.
//! - [`sampler`]: neighbor and subgraph-node mini-batch samplers, sampled
//!   adjacency construction, and the rename + source-sort layout transform
//!   that makes hidden-feature reads sequential.
//! - [`plan`]: lowering of a renamed mini-batch into per-layer kernel
//!   streams (prepared edge values, self contributions, carried rows).
//! - [`model`]: reference forward / loss / backward / weight update for
//!   GCN, GraphSAGE, and custom scatter-gather operators.
//! - [`sim`]: deterministic event-level simulator of the scatter-gather
//!   aggregate kernel and the systolic update kernel, with memory-traffic
//!   and stall counters, plus multi-die partitioning.
//! - [`perf`]: closed-form throughput and execution-time model, sparsity
//!   fitting, and sampling-thread sizing.
//! - [`dse`]: resource feasibility model and exhaustive search for the
//!   throughput-optimal per-die parallelism.

// Kernel and backward math walks several parallel buffers with one row
// or lane index; the indexed form keeps those loops aligned with the
// dataflow they model.
#![allow(clippy::needless_range_loop)]

pub mod dse;
pub mod error;
pub mod graph;
pub mod model;
pub mod perf;
pub mod plan;
pub mod sampler;
pub mod sim;

pub use error::{Error, Result};
