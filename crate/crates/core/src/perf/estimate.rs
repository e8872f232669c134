//! Closed-form per-layer times, propagation sums, and throughput.
//!
//! Throughput is measured in vertices traversed per second: the sum of
//! all per-layer batch sizes divided by the iteration execution time.
//! Sampling of the next batch overlaps execution of the current one, so
//! the execution time is the max of the two.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::perf::PlatformSpec;
use crate::sampler::BatchShape;
use crate::sim::AcceleratorConfig;

/// External-memory access pattern assumed for a layer's feature loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Random,
    Sequential,
}

/// Per-layer workload sizes: `|B^{l-1}|`, `|B^l|`, `|E^l|`.
#[derive(Debug, Clone, Copy)]
pub struct LayerShape {
    pub src_vertices: u64,
    pub dst_vertices: u64,
    pub edges: u64,
}

/// Feature widths used by a layer.
#[derive(Debug, Clone, Copy)]
pub struct LayerDims {
    /// Width of the vectors loaded and reduced during aggregation.
    pub agg_width: u64,
    /// Update-kernel input width (doubled for concat-style operators).
    pub update_in: u64,
    /// Update-kernel output width.
    pub update_out: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerTimes {
    pub t_load: f64,
    pub t_compute: f64,
    pub t_update: f64,
}

impl LayerTimes {
    pub fn t_aggregate(&self) -> f64 {
        self.t_load.max(self.t_compute)
    }
}

/// Closed-form layer times:
///
/// - `t_load = |B^{l-1}| * f * S_feat / (BW * alpha)`
/// - `t_compute = |E^l| * f / (n * lanes * freq)`
/// - `t_update = |B^l| * f_in * f_out / (m * freq)`
pub fn estimate_layer_times(
    shape: LayerShape,
    dims: LayerDims,
    cfg: &AcceleratorConfig,
    platform: &PlatformSpec,
    access: AccessKind,
) -> LayerTimes {
    let alpha = platform.alpha(access == AccessKind::Random);
    let t_load = (shape.src_vertices as f64) * (dims.agg_width as f64) * platform.feature_bytes
        / (platform.bandwidth_bytes_per_sec * alpha);
    let t_compute = (shape.edges as f64) * (dims.agg_width as f64)
        / ((cfg.scatter_gather_pes as f64) * (cfg.lanes_per_pe as f64) * cfg.freq_hz);
    let t_update = (shape.dst_vertices as f64) * (dims.update_in as f64) * (dims.update_out as f64)
        / ((cfg.macs as f64) * cfg.freq_hz);
    LayerTimes {
        t_load,
        t_compute,
        t_update,
    }
}

/// Propagation sums over per-layer `(t_aggregate, t_update)` pairs:
/// forward is `sum_l max(agg_l, upd_l)`; backward replaces the first
/// layer's term with its update time alone (no gradient flows below
/// layer 1).
pub fn estimate_propagation(layer_times: &[(f64, f64)]) -> (f64, f64) {
    let t_fp: f64 = layer_times.iter().map(|&(a, u)| a.max(u)).sum();
    let t_bp: f64 = match layer_times.split_first() {
        None => 0.0,
        Some((&(_, first_update), rest)) => {
            first_update + rest.iter().map(|&(a, u)| a.max(u)).sum::<f64>()
        }
    };
    (t_fp, t_bp)
}

/// One layer of an analyzable workload.
#[derive(Debug, Clone)]
pub struct WorkloadLayer {
    pub shape: LayerShape,
    pub dims: LayerDims,
    pub access: AccessKind,
}

/// Full workload: per-layer shapes/dims plus the throughput numerator.
#[derive(Debug, Clone)]
pub struct Workload {
    pub layers: Vec<WorkloadLayer>,
    pub total_vertices: u64,
}

impl Workload {
    /// Assembles a workload from predicted batch shapes and model feature
    /// dims (`f^0..f^L`). Layer 1 loads raw input features with random
    /// access; deeper layers read renamed hidden features sequentially.
    /// Aggregation at layer `l` operates on width `f^{l-1}`; `concat_input`
    /// doubles the update-kernel input width.
    pub fn from_shape(
        shape: &BatchShape,
        feature_dims: &[usize],
        concat_input: bool,
    ) -> Result<Self> {
        let num_layers = shape.num_layers();
        if feature_dims.len() != num_layers + 1 {
            return Err(Error::ShapeMismatch(format!(
                "need {} feature dims for {num_layers} layers, got {}",
                num_layers + 1,
                feature_dims.len()
            )));
        }
        let mut layers = Vec::with_capacity(num_layers);
        for l in 1..=num_layers {
            let f_prev = feature_dims[l - 1] as u64;
            let factor = if concat_input { 2 } else { 1 };
            layers.push(WorkloadLayer {
                shape: LayerShape {
                    src_vertices: shape.vertices[l - 1],
                    dst_vertices: shape.vertices[l],
                    edges: shape.edges[l - 1],
                },
                dims: LayerDims {
                    agg_width: f_prev,
                    update_in: factor * f_prev,
                    update_out: feature_dims[l] as u64,
                },
                access: if l == 1 {
                    AccessKind::Random
                } else {
                    AccessKind::Sequential
                },
            });
        }
        Ok(Self {
            layers,
            total_vertices: shape.total_vertices(),
        })
    }
}

/// Complete time decomposition for one training iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfEstimate {
    pub per_layer: Vec<LayerEstimate>,
    pub t_fp: f64,
    pub t_bp: f64,
    pub t_lc: f64,
    pub t_wu: f64,
    pub t_gnn: f64,
    pub t_sampling: f64,
    pub t_execution: f64,
    /// Vertices traversed per second.
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerEstimate {
    pub t_load: f64,
    pub t_compute: f64,
    pub t_aggregate: f64,
    pub t_update: f64,
}

impl PerfEstimate {
    /// Structured text report with every time component.
    pub fn report_text(&self) -> String {
        let mut out = String::new();
        for (i, l) in self.per_layer.iter().enumerate() {
            let _ = writeln!(out, "layer={} t_load={:.9e}", i + 1, l.t_load);
            let _ = writeln!(out, "layer={} t_compute={:.9e}", i + 1, l.t_compute);
            let _ = writeln!(out, "layer={} t_aggregate={:.9e}", i + 1, l.t_aggregate);
            let _ = writeln!(out, "layer={} t_update={:.9e}", i + 1, l.t_update);
        }
        let _ = writeln!(out, "t_fp={:.9e}", self.t_fp);
        let _ = writeln!(out, "t_bp={:.9e}", self.t_bp);
        let _ = writeln!(out, "t_lc={:.9e}", self.t_lc);
        let _ = writeln!(out, "t_wu={:.9e}", self.t_wu);
        let _ = writeln!(out, "t_gnn={:.9e}", self.t_gnn);
        let _ = writeln!(out, "t_sampling={:.9e}", self.t_sampling);
        let _ = writeln!(out, "t_execution={:.9e}", self.t_execution);
        let _ = writeln!(out, "throughput_nvtps={:.9e}", self.throughput);
        out
    }
}

/// Evaluates the full throughput model for one accelerator configuration.
///
/// The workload is split evenly across dies (worst die = ceiling share);
/// per-layer aggregate and update stages are pipelined, so each layer
/// contributes the max of the two. Host-side loss calculation, weight
/// update, and single-thread sampling times come from calibration.
pub fn estimate_throughput(
    workload: &Workload,
    cfg: &AcceleratorConfig,
    platform: &PlatformSpec,
    t_sampling: f64,
    t_lc: f64,
    t_wu: f64,
) -> PerfEstimate {
    let dies = platform.dies.max(1) as u64;
    let mut per_layer = Vec::with_capacity(workload.layers.len());
    let mut pairs = Vec::with_capacity(workload.layers.len());
    for layer in &workload.layers {
        let share = LayerShape {
            src_vertices: layer.shape.src_vertices.div_ceil(dies),
            dst_vertices: layer.shape.dst_vertices.div_ceil(dies),
            edges: layer.shape.edges.div_ceil(dies),
        };
        let t = estimate_layer_times(share, layer.dims, cfg, platform, layer.access);
        pairs.push((t.t_aggregate(), t.t_update));
        per_layer.push(LayerEstimate {
            t_load: t.t_load,
            t_compute: t.t_compute,
            t_aggregate: t.t_aggregate(),
            t_update: t.t_update,
        });
    }
    let (t_fp, t_bp) = estimate_propagation(&pairs);
    let t_gnn = t_fp + t_lc + t_bp + t_wu;
    let t_execution = t_sampling.max(t_gnn);
    let throughput = if t_execution > 0.0 {
        workload.total_vertices as f64 / t_execution
    } else {
        0.0
    };
    PerfEstimate {
        per_layer,
        t_fp,
        t_bp,
        t_lc,
        t_wu,
        t_gnn,
        t_sampling,
        t_execution,
        throughput,
    }
}

/// Smallest thread count `k <= max_threads` with
/// `t_sampling_1thread / k < t_gnn` under linear scaling. Returns
/// `(max_threads, true)` when no count satisfies the bound.
pub fn min_sampling_threads(
    t_sampling_1thread: f64,
    t_gnn: f64,
    max_threads: usize,
) -> (usize, bool) {
    if t_gnn > 0.0 {
        for k in 1..=max_threads.max(1) {
            if t_sampling_1thread / (k as f64) < t_gnn {
                return (k, false);
            }
        }
    }
    (max_threads.max(1), true)
}
