//! Shared f64 test oracles, independent of the crate's implementation
//! paths: dense normalized-adjacency aggregation, concat-mean
//! aggregation, and a from-scratch f64 forward/loss used for finite
//! differences.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use gnnaccel::graph::{FeatureMatrix, Graph};
use gnnaccel::model::{ModelSpec, OperatorKind};
use gnnaccel::plan::ExecutionPlan;

/// Dense `D^{-1/2} (A + I) D^{-1/2}` as an f64 matrix, `hat[v][u]`.
pub fn dense_gcn_hat(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.num_vertices;
    let mut hat = vec![vec![0.0f64; n]; n];
    let deg = |v: usize| f64::from(graph.degrees[v]);
    for e in &graph.edges {
        let (u, v) = (e.src as usize, e.dst as usize);
        hat[v][u] += f64::from(e.val) / (deg(u) * deg(v)).sqrt();
    }
    for v in 0..n {
        hat[v][v] += 1.0 / deg(v);
    }
    hat
}

/// Dense oracle aggregation: `hat * H` in f64.
pub fn dense_gcn_aggregate(graph: &Graph, h: &FeatureMatrix) -> Vec<Vec<f64>> {
    let hat = dense_gcn_hat(graph);
    let n = graph.num_vertices;
    let dim = h.dim();
    let mut out = vec![vec![0.0f64; dim]; n];
    for v in 0..n {
        for u in 0..n {
            let w = hat[v][u];
            if w != 0.0 {
                for k in 0..dim {
                    out[v][k] += w * f64::from(h.row(u)[k]);
                }
            }
        }
    }
    out
}

/// Dense concat-mean oracle: `h_v || mean(h_u : u in N(v) + {v})` in f64.
/// Multi-edges contribute once per occurrence, matching the edge stream.
pub fn dense_sage_aggregate(graph: &Graph, h: &FeatureMatrix) -> Vec<Vec<f64>> {
    let n = graph.num_vertices;
    let dim = h.dim();
    let mut out = vec![vec![0.0f64; 2 * dim]; n];
    let mut sums = vec![vec![0.0f64; dim]; n];
    let mut counts = vec![1u64; n];
    for v in 0..n {
        for k in 0..dim {
            sums[v][k] = f64::from(h.row(v)[k]);
        }
    }
    for e in &graph.edges {
        let (u, v) = (e.src as usize, e.dst as usize);
        counts[v] += 1;
        for k in 0..dim {
            sums[v][k] += f64::from(h.row(u)[k]);
        }
    }
    for v in 0..n {
        for k in 0..dim {
            out[v][k] = f64::from(h.row(v)[k]);
            out[v][dim + k] = sums[v][k] / counts[v] as f64;
        }
    }
    out
}

/// Naive f64 matmul + bias + ReLU oracle over f64 rows.
pub fn dense_update(rows: &[Vec<f64>], w: &FeatureMatrix, b: &[f32]) -> Vec<Vec<f64>> {
    let f_out = w.dim();
    rows.iter()
        .map(|x| {
            (0..f_out)
                .map(|o| {
                    let mut acc = f64::from(b[o]);
                    for (a, &xa) in x.iter().enumerate() {
                        acc += xa * f64::from(w.row(a)[o]);
                    }
                    acc.max(0.0)
                })
                .collect()
        })
        .collect()
}

/// Relative error with a scale floor: `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// f64 shadow of the model parameters for finite differencing.
#[derive(Clone)]
pub struct F64Params {
    pub dims: Vec<usize>,
    pub kind: OperatorKind,
    /// `weights[l][fi][fo]`.
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

impl F64Params {
    pub fn from_model(model: &ModelSpec) -> Self {
        let weights = model
            .weights
            .iter()
            .map(|w| {
                (0..w.rows())
                    .map(|r| w.row(r).iter().map(|&v| f64::from(v)).collect())
                    .collect()
            })
            .collect();
        let biases = model
            .biases
            .iter()
            .map(|b| b.iter().map(|&v| f64::from(v)).collect())
            .collect();
        Self {
            dims: model.dims.clone(),
            kind: model.operator.kind(),
            weights,
            biases,
        }
    }
}

/// From-scratch f64 forward over the plan's prepared streams. Returns
/// the final-layer rows and the minimum |preactivation| seen anywhere
/// (the margin guards finite differences against ReLU kinks).
pub fn f64_forward(
    plan: &ExecutionPlan,
    x: &FeatureMatrix,
    params: &F64Params,
) -> (Vec<Vec<f64>>, f64) {
    let mut h: Vec<Vec<f64>> = (0..x.rows())
        .map(|r| x.row(r).iter().map(|&v| f64::from(v)).collect())
        .collect();
    let mut kink_margin = f64::INFINITY;

    for (li, layer) in plan.layers.iter().enumerate() {
        let f_prev = params.dims[li];
        // Aggregate.
        let agg: Vec<Vec<f64>> = match params.kind {
            OperatorKind::Gcn => {
                let mut out = vec![vec![0.0f64; f_prev]; layer.dst_count];
                for e in &layer.edges.entries {
                    for k in 0..f_prev {
                        out[e.dst as usize][k] += f64::from(e.val) * h[e.src as usize][k];
                    }
                }
                out
            }
            OperatorKind::Sage => {
                let mut sums = vec![vec![0.0f64; f_prev]; layer.dst_count];
                for e in &layer.edges.entries {
                    for k in 0..f_prev {
                        sums[e.dst as usize][k] += h[e.src as usize][k];
                    }
                }
                (0..layer.dst_count)
                    .map(|j| {
                        let own = &h[layer.self_rows[j] as usize];
                        let cnt = layer.edge_counts[j] as f64;
                        let mut row = own.clone();
                        row.extend(sums[j].iter().map(|s| s / cnt));
                        row
                    })
                    .collect()
            }
            OperatorKind::Custom => panic!("f64 oracle covers the built-in operators"),
        };
        // Update: affine + ReLU.
        let w = &params.weights[li];
        let b = &params.biases[li];
        let f_out = b.len();
        h = agg
            .iter()
            .map(|a| {
                (0..f_out)
                    .map(|o| {
                        let mut z = b[o];
                        for (fi, &ai) in a.iter().enumerate() {
                            z += ai * w[fi][o];
                        }
                        kink_margin = kink_margin.min(z.abs());
                        z.max(0.0)
                    })
                    .collect()
            })
            .collect();
    }
    (h, kink_margin)
}

/// f64 forward followed by softmax cross-entropy (mean over targets).
/// Returns `(loss, min |preactivation|)`.
pub fn f64_forward_loss(
    plan: &ExecutionPlan,
    x: &FeatureMatrix,
    params: &F64Params,
    labels: &[u32],
) -> (f64, f64) {
    let (h, kink_margin) = f64_forward(plan, x, params);
    let n = h.len() as f64;
    let mut loss = 0.0;
    for (i, logits) in h.iter().enumerate() {
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = logits.iter().map(|z| (z - max).exp()).sum();
        let y = labels[i] as usize;
        loss += -((logits[y] - max) - denom.ln()) / n;
    }
    (loss, kink_margin)
}

/// Central finite differences of the f64 loss with respect to every
/// weight and bias entry. Step 1e-3.
pub fn fd_gradients(
    plan: &ExecutionPlan,
    x: &FeatureMatrix,
    params: &F64Params,
    labels: &[u32],
) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<f64>>) {
    let step = 1e-3;
    let mut dw: Vec<Vec<Vec<f64>>> = params
        .weights
        .iter()
        .map(|w| w.iter().map(|row| vec![0.0; row.len()]).collect())
        .collect();
    let mut db: Vec<Vec<f64>> = params.biases.iter().map(|b| vec![0.0; b.len()]).collect();

    for l in 0..params.weights.len() {
        for fi in 0..params.weights[l].len() {
            for fo in 0..params.weights[l][fi].len() {
                let mut plus = params.clone();
                plus.weights[l][fi][fo] += step;
                let mut minus = params.clone();
                minus.weights[l][fi][fo] -= step;
                let (lp, _) = f64_forward_loss(plan, x, &plus, labels);
                let (lm, _) = f64_forward_loss(plan, x, &minus, labels);
                dw[l][fi][fo] = (lp - lm) / (2.0 * step);
            }
        }
        for o in 0..params.biases[l].len() {
            let mut plus = params.clone();
            plus.biases[l][o] += step;
            let mut minus = params.clone();
            minus.biases[l][o] -= step;
            let (lp, _) = f64_forward_loss(plan, x, &plus, labels);
            let (lm, _) = f64_forward_loss(plan, x, &minus, labels);
            db[l][o] = (lp - lm) / (2.0 * step);
        }
    }
    (dw, db)
}
