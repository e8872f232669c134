//! Event-level model of the scatter-gather aggregate kernel.
//!
//! Datapath: a feature duplicator streams source vectors to `n` scatter
//! PEs (one edge each per wave); per-edge updates route to gather PE
//! `dst mod n`, which accumulates into the on-chip destination buffer;
//! finished rows are written back sequentially at the end.
//!
//! Timing model, per wave of `n` edges:
//! - load occupies `ceil(f/lanes)` cycles per source vector that is not
//!   already held in the duplicator register (consecutive same-source
//!   edges reuse it; the `reuse_enabled` switch disables that path);
//! - scatter occupies `ceil(f/lanes)` cycles;
//! - gather accepts one update per PE per cycle, so several updates
//!   bound for the same PE serialize (`routing_conflict_cycles`), and an
//!   update whose destination row was accumulated within
//!   `pipeline_depth` cycles stalls the whole gather pipeline
//!   (`raw_stalls`) until the hazard window clears.
//!
//! The three stages are pipelined, so a wave advances the clock by the
//! slowest of the three. An empty edge stream never engages the
//! datapath: it costs exactly the fill/drain constant and returns zeros.
//!
//! The routing network is modeled at this contract level (acceptance
//! rate and conflict serialization), not switch by switch; its hardware
//! cost appears in the resource model instead.
//!
//! `random_accesses` counts backward jumps in each external read stream:
//! after renaming and source sorting the stream row ids are monotone
//! nondecreasing, which models sequential burst reads. Bandwidth effects
//! of sparse-but-monotone first-layer reads belong to the analytical
//! model's effective-bandwidth ratio, not to this counter.

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;
use crate::model::{GatherKind, Operator};
use crate::plan::LayerPlan;
use crate::sim::{AcceleratorConfig, SimTrace};

pub fn simulate_aggregate(
    layer: &LayerPlan,
    h_prev: &FeatureMatrix,
    cfg: &AcceleratorConfig,
    operator: &Operator,
) -> Result<(FeatureMatrix, SimTrace)> {
    cfg.validate()?;
    if h_prev.rows() != layer.src_count {
        return Err(Error::ShapeMismatch(format!(
            "aggregate input has {} rows, layer consumes {}",
            h_prev.rows(),
            layer.src_count
        )));
    }
    let dim = h_prev.dim();
    let out_dim = match operator {
        Operator::Sage => 2 * dim,
        _ => dim,
    };
    let needed = layer.dst_count * out_dim * std::mem::size_of::<f32>();
    if needed > cfg.dest_buffer_bytes {
        return Err(Error::CapacityExceeded {
            resource: "destination buffer",
            needed,
            available: cfg.dest_buffer_bytes,
        });
    }
    for e in &layer.edges.entries {
        if e.src as usize >= layer.src_count || e.dst as usize >= layer.dst_count {
            return Err(Error::ShapeMismatch(
                "edge indices exceed layer row counts".into(),
            ));
        }
    }

    let mut trace = SimTrace {
        fill_drain_cycles: cfg.fill_drain_cycles,
        cycles: cfg.fill_drain_cycles,
        ..Default::default()
    };
    if layer.edges.is_empty() {
        return Ok((FeatureMatrix::zeros(layer.dst_count, out_dim), trace));
    }

    let n = cfg.scatter_gather_pes;
    let vec_cycles = dim.div_ceil(cfg.lanes_per_pe) as u64;
    let vec_bytes = (dim * std::mem::size_of::<f32>()) as u64;
    let depth = cfg.pipeline_depth as i64;

    let mut acc = FeatureMatrix::zeros(layer.dst_count, dim);
    let mut clock: i64 = 0;
    let mut register: Option<u32> = None;
    let mut prev_loaded_row: Option<u32> = None;
    let mut last_write = vec![i64::MIN / 2; layer.dst_count];
    let mut pe_slots: Vec<Vec<usize>> = vec![Vec::new(); n];

    let edges = &layer.edges.entries;
    let mut start = 0usize;
    while start < edges.len() {
        let wave = &edges[start..edges.len().min(start + n)];

        // Load stage: fetch source vectors not held in the register.
        let mut load_cycles = 0u64;
        for e in wave {
            if !cfg.reuse_enabled || register != Some(e.src) {
                trace.external_feature_loads += 1;
                trace.bytes_loaded += vec_bytes;
                if let Some(prev) = prev_loaded_row {
                    if e.src < prev {
                        trace.random_accesses += 1;
                    }
                }
                prev_loaded_row = Some(e.src);
                register = Some(e.src);
                load_cycles += vec_cycles;
            }
        }

        // Scatter stage: each PE takes one edge of the wave.
        let scatter_cycles = vec_cycles;

        // Gather stage: route by destination, one acceptance per PE per
        // cycle; serialize conflicts, stall on RAW hazards.
        for q in &mut pe_slots {
            q.clear();
        }
        for (i, e) in wave.iter().enumerate() {
            pe_slots[e.dst as usize % n].push(start + i);
        }
        let slots = pe_slots.iter().map(Vec::len).max().unwrap_or(0);
        let mut gather_cycles = 0u64;
        for slot in 0..slots {
            let mut t = clock + gather_cycles as i64;
            for q in &pe_slots {
                if let Some(&edge_idx) = q.get(slot) {
                    let row = edges[edge_idx].dst as usize;
                    let gap = t - last_write[row];
                    if gap < depth {
                        let stall = (depth - gap) as u64;
                        trace.raw_stalls += stall;
                        gather_cycles += stall;
                        t += stall as i64;
                    }
                }
            }
            for q in &pe_slots {
                if let Some(&edge_idx) = q.get(slot) {
                    let e = &edges[edge_idx];
                    let src = h_prev.row(e.src as usize);
                    let dst = acc.row_mut(e.dst as usize);
                    match operator {
                        Operator::Custom(c) => {
                            for k in 0..dim {
                                dst[k] += (c.scatter)(src[k], e.val);
                            }
                        }
                        _ => {
                            for k in 0..dim {
                                dst[k] += e.val * src[k];
                            }
                        }
                    }
                    last_write[e.dst as usize] = t;
                }
            }
            gather_cycles += 1;
        }
        if slots > 1 {
            trace.routing_conflict_cycles += (slots - 1) as u64;
        }

        clock += load_cycles.max(scatter_cycles).max(gather_cycles) as i64;
        start += wave.len();
    }
    trace.cycles += clock as u64;

    // Drain: finalize rows and write them back sequentially. The concat
    // operator reads each destination's own previous feature here; that
    // stream visits carried rows in slot order, hence sequentially.
    let out = match operator {
        Operator::Gcn => acc,
        Operator::Sage => {
            let mut prev_self_row: Option<u32> = None;
            let mut out = FeatureMatrix::zeros(layer.dst_count, out_dim);
            for j in 0..layer.dst_count {
                let self_row = layer.self_rows[j];
                trace.bytes_loaded += vec_bytes;
                if let Some(prev) = prev_self_row {
                    if self_row < prev {
                        trace.random_accesses += 1;
                    }
                }
                prev_self_row = Some(self_row);
                let own = h_prev.row(self_row as usize);
                let cnt = layer.edge_counts[j];
                let row = out.row_mut(j);
                row[..dim].copy_from_slice(own);
                if cnt > 0 {
                    let inv = 1.0 / cnt as f32;
                    let sum = acc.row(j);
                    for k in 0..dim {
                        row[dim + k] = sum[k] * inv;
                    }
                }
            }
            out
        }
        Operator::Custom(c) => {
            if c.gather == GatherKind::Mean {
                for j in 0..layer.dst_count {
                    let cnt = layer.edge_counts[j];
                    if cnt > 0 {
                        let inv = 1.0 / cnt as f32;
                        for v in acc.row_mut(j) {
                            *v *= inv;
                        }
                    }
                }
            }
            acc
        }
    };
    let out_vec_cycles = out_dim.div_ceil(cfg.lanes_per_pe) as u64;
    trace.cycles += layer.dst_count.div_ceil(n) as u64 * out_vec_cycles;

    Ok((out, trace))
}
