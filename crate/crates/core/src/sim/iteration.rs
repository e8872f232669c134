//! Multi-die task partitioning and full-iteration simulation.

use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::graph::{CooEdgeList, FeatureMatrix};
use crate::model::ModelSpec;
use crate::plan::{ExecutionPlan, LayerPlan};
use crate::sim::update::simulate_update_with_activation;
use crate::sim::{simulate_aggregate, AcceleratorConfig, SimTrace};

/// Splits `0..size` into `dies` contiguous prefix ranges whose lengths
/// differ by at most one (earlier dies take the remainder).
pub fn partition_across_dies(size: usize, dies: usize) -> Vec<Range<usize>> {
    assert!(dies >= 1, "dies must be >= 1");
    let base = size / dies;
    let extra = size % dies;
    let mut ranges = Vec::with_capacity(dies);
    let mut start = 0;
    for d in 0..dies {
        let len = base + usize::from(d < extra);
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}

/// Counters for one kernel pair on one die.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDieTrace {
    pub layer: usize,
    pub die: usize,
    pub aggregate: SimTrace,
    pub update: SimTrace,
}

/// Trace of a whole forward iteration across layers and dies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTrace {
    pub records: Vec<LayerDieTrace>,
    /// Per layer: max over dies of max(aggregate, update) cycles, since
    /// dies run in parallel and the two stages are pipelined.
    pub layer_cycles: Vec<u64>,
    pub total_cycles: u64,
}

impl IterationTrace {
    /// Work counters summed over every kernel; cycles from the
    /// parallel/pipelined combination.
    pub fn combined(&self) -> SimTrace {
        let mut total = SimTrace::default();
        for r in &self.records {
            let both = r.aggregate.sequential(r.update);
            total = SimTrace {
                cycles: 0,
                ..total.sequential(both)
            };
        }
        total.cycles = self.total_cycles;
        total
    }

    /// Line-delimited records with a stable field order, one per kernel
    /// per layer per die.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(
                out,
                "layer={} die={} stage=aggregate {}",
                r.layer,
                r.die,
                r.aggregate.record()
            );
            let _ = writeln!(
                out,
                "layer={} die={} stage=update {}",
                r.layer,
                r.die,
                r.update.record()
            );
        }
        for (i, c) in self.layer_cycles.iter().enumerate() {
            let _ = writeln!(out, "layer={} cycles={}", i + 1, c);
        }
        let _ = writeln!(out, "total cycles={}", self.total_cycles);
        out
    }
}

// Restriction of a layer to one die's destination range. Sources stay
// global: every die reads from its own memory channel independently.
fn die_slice(layer: &LayerPlan, range: &Range<usize>) -> LayerPlan {
    let entries = layer
        .edges
        .entries
        .iter()
        .filter(|e| range.contains(&(e.dst as usize)))
        .map(|e| {
            let mut e = *e;
            e.dst -= range.start as u32;
            e
        })
        .collect();
    let mut edges = CooEdgeList::new(entries);
    edges.sorted_by_source = layer.edges.sorted_by_source;
    LayerPlan {
        src_count: layer.src_count,
        dst_count: range.len(),
        edges,
        self_rows: if layer.self_rows.is_empty() {
            Vec::new()
        } else {
            layer.self_rows[range.clone()].to_vec()
        },
        edge_counts: layer.edge_counts[range.clone()].to_vec(),
    }
}

/// Simulates one forward iteration: every layer is partitioned across
/// dies by destination range, each die runs its aggregate and update
/// kernels, and the per-layer time is the slowest die's slowest stage
/// (the two stages are pipelined). Functional output is identical to the
/// reference forward pass.
pub fn simulate_training_iteration(
    plan: &ExecutionPlan,
    x: &FeatureMatrix,
    model: &ModelSpec,
    cfg: &AcceleratorConfig,
) -> Result<(FeatureMatrix, IterationTrace)> {
    cfg.validate()?;
    if plan.num_layers() != model.num_layers() {
        return Err(Error::ShapeMismatch(format!(
            "plan has {} layers, model has {}",
            plan.num_layers(),
            model.num_layers()
        )));
    }
    if plan.operator != model.operator.kind() {
        return Err(Error::InvalidSpec(
            "plan was lowered for a different operator".into(),
        ));
    }
    if x.rows() != plan.input_rows() || x.dim() != model.dims[0] {
        return Err(Error::ShapeMismatch(format!(
            "input is {}x{}, plan needs {}x{}",
            x.rows(),
            x.dim(),
            plan.input_rows(),
            model.dims[0]
        )));
    }

    let activation = model.operator.activation();
    let mut records = Vec::new();
    let mut layer_cycles = Vec::with_capacity(plan.num_layers());
    let mut h = x.clone();
    for (li, layer) in plan.layers.iter().enumerate() {
        let w = &model.weights[li];
        let b = &model.biases[li];
        let mut next = FeatureMatrix::zeros(layer.dst_count, w.dim());
        let mut slowest = 0u64;
        for (die, range) in partition_across_dies(layer.dst_count, cfg.dies)
            .iter()
            .enumerate()
        {
            let sub = die_slice(layer, range);
            let (agg, agg_trace) = simulate_aggregate(&sub, &h, cfg, &model.operator)?;
            let (out, upd_trace) = simulate_update_with_activation(&agg, w, b, cfg, activation)?;
            for (offset, row) in range.clone().zip(0..out.rows()) {
                next.row_mut(offset).copy_from_slice(out.row(row));
            }
            slowest = slowest.max(agg_trace.cycles.max(upd_trace.cycles));
            records.push(LayerDieTrace {
                layer: li + 1,
                die,
                aggregate: agg_trace,
                update: upd_trace,
            });
        }
        layer_cycles.push(slowest);
        h = next;
    }

    let total_cycles = layer_cycles.iter().sum();
    Ok((
        h,
        IterationTrace {
            records,
            layer_cycles,
            total_cycles,
        },
    ))
}
