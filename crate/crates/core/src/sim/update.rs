//! Model of the systolic update kernel.
//!
//! The kernel performs block matrix multiplication with `m` parallel
//! MACs, the weight matrix resident in an on-chip buffer, and an
//! element-wise activation behind each MAC column. Compute time is
//! `ceil(rows * f_in * f_out / m)` cycles plus the fixed fill/drain
//! constant; results accumulate in input-dimension order, which keeps
//! the output bit-identical to the reference update.

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;
use crate::model::Activation;
use crate::sim::{AcceleratorConfig, SimTrace};

/// Simulates the update kernel with the standard ReLU activation.
pub fn simulate_update(
    agg: &FeatureMatrix,
    w: &FeatureMatrix,
    b: &[f32],
    cfg: &AcceleratorConfig,
) -> Result<(FeatureMatrix, SimTrace)> {
    simulate_update_with_activation(agg, w, b, cfg, Activation::Relu)
}

pub(crate) fn simulate_update_with_activation(
    agg: &FeatureMatrix,
    w: &FeatureMatrix,
    b: &[f32],
    cfg: &AcceleratorConfig,
    activation: Activation,
) -> Result<(FeatureMatrix, SimTrace)> {
    cfg.validate()?;
    if agg.dim() != w.rows() {
        return Err(Error::ShapeMismatch(format!(
            "update input width {} does not match weight rows {}",
            agg.dim(),
            w.rows()
        )));
    }
    if b.len() != w.dim() {
        return Err(Error::ShapeMismatch("bias length mismatch".into()));
    }
    let weight_bytes = w.rows() * w.dim() * std::mem::size_of::<f32>();
    if weight_bytes > cfg.weight_buffer_bytes {
        return Err(Error::CapacityExceeded {
            resource: "weight buffer",
            needed: weight_bytes,
            available: cfg.weight_buffer_bytes,
        });
    }

    let (rows, f_in, f_out) = (agg.rows(), w.rows(), w.dim());
    let mut out = FeatureMatrix::zeros(rows, f_out);
    for i in 0..rows {
        let x = agg.row(i);
        let row = out.row_mut(i);
        row.copy_from_slice(b);
        for a in 0..f_in {
            let xa = x[a];
            let wrow = w.row(a);
            for o in 0..f_out {
                row[o] += xa * wrow[o];
            }
        }
        for v in row.iter_mut() {
            *v = activation.apply(*v);
        }
    }

    let mac_ops = (rows as u64) * (f_in as u64) * (f_out as u64);
    let compute_cycles = mac_ops.div_ceil(cfg.macs as u64);
    let trace = SimTrace {
        cycles: compute_cycles + cfg.fill_drain_cycles,
        fill_drain_cycles: cfg.fill_drain_cycles,
        bytes_loaded: ((rows * f_in + f_in * f_out + f_out) * std::mem::size_of::<f32>()) as u64,
        ..Default::default()
    };
    Ok((out, trace))
}
