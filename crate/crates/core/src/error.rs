//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("vertex {vertex} out of range (graph has {num_vertices} vertices)")]
    VertexOutOfRange { vertex: u64, num_vertices: usize },

    #[error("isolated vertex under chosen convention: vertex {0} has zero degree")]
    IsolatedVertex(u64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: u32, num_classes: usize },

    #[error("batch is already renamed")]
    AlreadyRenamed,

    #[error("batch is not renamed; call rename_and_sort first")]
    NotRenamed,

    #[error("no forward cache available; run forward before backward")]
    MissingForwardCache,

    #[error("{resource} capacity exceeded: need {needed} bytes, have {available} bytes")]
    CapacityExceeded {
        resource: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("no feasible accelerator configuration: {0}")]
    Infeasible(String),

    #[error("sparsity model required for this shape query but none was provided")]
    MissingSparsityModel,

    #[error("sample size {size} exceeds graph size {num_vertices}")]
    SampleTooLarge { size: usize, num_vertices: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
