//! Analytical throughput and execution-time model.

mod estimate;
mod platform;
mod sparsity;

pub use estimate::{
    estimate_layer_times, estimate_propagation, estimate_throughput, min_sampling_threads,
    AccessKind, LayerDims, LayerShape, LayerTimes, PerfEstimate, Workload, WorkloadLayer,
};
pub use platform::{Calibration, PlatformSpec};
pub use sparsity::{fit_sparsity, SparsityModel};
