//! Reference implementation of one training iteration.
//!
//! This is the functional oracle the simulator is checked against. All
//! arithmetic is `f32` and gather accumulation follows the prepared
//! stream's source-sorted order, so results are bit-reproducible and
//! directly comparable with the simulated kernels.

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;
use crate::model::{Activation, GatherKind, ModelSpec, Operator, TrainState};
use crate::plan::{ExecutionPlan, LayerPlan};

#[derive(Debug, Clone)]
pub(crate) struct ForwardCache {
    layers: Vec<LayerCache>,
    output: FeatureMatrix,
}

#[derive(Debug, Clone)]
struct LayerCache {
    h_prev: FeatureMatrix,
    agg: FeatureMatrix,
    preact: FeatureMatrix,
}

/// Per-layer parameter gradients.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<FeatureMatrix>,
    pub biases: Vec<Vec<f32>>,
}

impl Gradients {
    pub fn zeros_like(model: &ModelSpec) -> Self {
        Self {
            weights: model
                .weights
                .iter()
                .map(|w| FeatureMatrix::zeros(w.rows(), w.dim()))
                .collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

/// Neighborhood reduction for one layer.
///
/// The prepared stream already carries operator weights and explicit
/// self edges, so the normalized operator is a pure weighted sum. The
/// concat operator divides the accumulated sum by the per-destination
/// edge count and prefixes the destination's own previous feature.
pub fn aggregate_ref(
    layer: &LayerPlan,
    h_prev: &FeatureMatrix,
    operator: &Operator,
) -> Result<FeatureMatrix> {
    if h_prev.rows() != layer.src_count {
        return Err(Error::ShapeMismatch(format!(
            "aggregate input has {} rows, layer consumes {}",
            h_prev.rows(),
            layer.src_count
        )));
    }
    let dim = h_prev.dim();
    for e in &layer.edges.entries {
        if e.src as usize >= layer.src_count || e.dst as usize >= layer.dst_count {
            return Err(Error::ShapeMismatch(
                "edge indices exceed layer row counts".into(),
            ));
        }
    }

    match operator {
        Operator::Gcn => {
            let mut out = FeatureMatrix::zeros(layer.dst_count, dim);
            for e in &layer.edges.entries {
                let src = h_prev.row(e.src as usize);
                let dst = out.row_mut(e.dst as usize);
                for k in 0..dim {
                    dst[k] += e.val * src[k];
                }
            }
            Ok(out)
        }
        Operator::Sage => {
            let mut acc = FeatureMatrix::zeros(layer.dst_count, dim);
            for e in &layer.edges.entries {
                let src = h_prev.row(e.src as usize);
                let dst = acc.row_mut(e.dst as usize);
                for k in 0..dim {
                    dst[k] += e.val * src[k];
                }
            }
            let mut out = FeatureMatrix::zeros(layer.dst_count, 2 * dim);
            for j in 0..layer.dst_count {
                let own = h_prev.row(layer.self_rows[j] as usize);
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
            Ok(out)
        }
        Operator::Custom(c) => {
            let mut acc = FeatureMatrix::zeros(layer.dst_count, dim);
            for e in &layer.edges.entries {
                let src = h_prev.row(e.src as usize);
                let dst = acc.row_mut(e.dst as usize);
                for k in 0..dim {
                    dst[k] += (c.scatter)(src[k], e.val);
                }
            }
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
            Ok(acc)
        }
    }
}

/// Row-wise affine transform followed by ReLU.
pub fn update_ref(agg: &FeatureMatrix, w: &FeatureMatrix, b: &[f32]) -> Result<FeatureMatrix> {
    affine_activation(agg, w, b, Activation::Relu)
}

pub(crate) fn affine_activation(
    agg: &FeatureMatrix,
    w: &FeatureMatrix,
    b: &[f32],
    activation: Activation,
) -> Result<FeatureMatrix> {
    let preact = affine(agg, w, b)?;
    let mut out = preact;
    for v in out.data_mut() {
        *v = activation.apply(*v);
    }
    Ok(out)
}

fn affine(agg: &FeatureMatrix, w: &FeatureMatrix, b: &[f32]) -> Result<FeatureMatrix> {
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
    let (f_in, f_out) = (w.rows(), w.dim());
    let mut out = FeatureMatrix::zeros(agg.rows(), f_out);
    for i in 0..agg.rows() {
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
    }
    Ok(out)
}

/// Forward propagation over every layer of the plan; caches per-layer
/// inputs for the backward pass.
pub fn forward(
    plan: &ExecutionPlan,
    x: &FeatureMatrix,
    state: &mut TrainState,
) -> Result<FeatureMatrix> {
    let model = &state.model;
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
    let mut caches = Vec::with_capacity(plan.num_layers());
    let mut h = x.clone();
    for (li, layer) in plan.layers.iter().enumerate() {
        let agg = aggregate_ref(layer, &h, &model.operator)?;
        let preact = affine(&agg, &model.weights[li], &model.biases[li])?;
        let mut next = preact.clone();
        for v in next.data_mut() {
            *v = activation.apply(*v);
        }
        caches.push(LayerCache {
            h_prev: h,
            agg,
            preact,
        });
        h = next;
    }
    state.cache = Some(ForwardCache {
        layers: caches,
        output: h.clone(),
    });
    Ok(h)
}

/// Softmax cross-entropy over the targets followed by reverse-mode
/// backward propagation through every layer. Consumes the forward cache.
///
/// The loss is the weighted mean over targets: `sum_i w_i * ce_i / N`
/// with unit weights by default. Backward aggregation runs the forward
/// scatter machinery in reverse (edge direction flipped, same values).
pub fn loss_and_backward(
    state: &mut TrainState,
    plan: &ExecutionPlan,
    labels: &[u32],
    target_weights: Option<&[f32]>,
) -> Result<(f32, Gradients)> {
    let cache = state.cache.take().ok_or(Error::MissingForwardCache)?;
    let model = &state.model;
    let num_classes = *model.dims.last().unwrap();
    let targets = cache.output.rows();
    if labels.len() != targets {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} targets",
            labels.len(),
            targets
        )));
    }
    if let Some(w) = target_weights {
        if w.len() != targets {
            return Err(Error::ShapeMismatch("target weight length mismatch".into()));
        }
    }
    for &y in labels {
        if y as usize >= num_classes {
            return Err(Error::LabelOutOfRange {
                label: y,
                num_classes,
            });
        }
    }

    // Softmax cross-entropy on the output rows.
    let inv_n = 1.0 / targets.max(1) as f32;
    let mut d_h = FeatureMatrix::zeros(targets, num_classes);
    let mut loss_acc = 0.0f64;
    for i in 0..targets {
        let logits = cache.output.row(i);
        let weight = target_weights.map_or(1.0, |w| w[i]);
        let max = logits.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        let mut denom = 0.0f32;
        for &z in logits {
            denom += (z - max).exp();
        }
        let y = labels[i] as usize;
        let log_p = (logits[y] - max) - denom.ln();
        loss_acc += f64::from(weight) * f64::from(-log_p) * f64::from(inv_n);
        let row = d_h.row_mut(i);
        for (k, &z) in logits.iter().enumerate() {
            let p = (z - max).exp() / denom;
            row[k] = weight * inv_n * (p - if k == y { 1.0 } else { 0.0 });
        }
    }

    let activation = model.operator.activation();
    let mut grads = Gradients::zeros_like(model);
    for li in (0..plan.num_layers()).rev() {
        let layer = &plan.layers[li];
        let lc = &cache.layers[li];
        let w = &model.weights[li];
        let (f_in, f_out) = (w.rows(), w.dim());
        let dst = layer.dst_count;

        // Through the activation.
        let mut d_z = d_h;
        if activation == Activation::Relu {
            for (v, &z) in d_z.data_mut().iter_mut().zip(lc.preact.data()) {
                if z <= 0.0 {
                    *v = 0.0;
                }
            }
        }

        // Parameter gradients.
        let dw = grads.weights[li].data_mut();
        for i in 0..dst {
            let a = lc.agg.row(i);
            let dz = d_z.row(i);
            for fi in 0..f_in {
                let ai = a[fi];
                let dwrow = &mut dw[fi * f_out..(fi + 1) * f_out];
                for o in 0..f_out {
                    dwrow[o] += ai * dz[o];
                }
            }
        }
        let db = &mut grads.biases[li];
        for i in 0..dst {
            for (o, &v) in d_z.row(i).iter().enumerate() {
                db[o] += v;
            }
        }

        // Into the aggregation output.
        let mut d_agg = FeatureMatrix::zeros(dst, f_in);
        for i in 0..dst {
            let dz = d_z.row(i);
            let da = d_agg.row_mut(i);
            for fi in 0..f_in {
                let wrow = w.row(fi);
                let mut acc = 0.0f32;
                for o in 0..f_out {
                    acc += dz[o] * wrow[o];
                }
                da[fi] = acc;
            }
        }

        // Through the aggregation: reversed edges, same values.
        let f_prev = model.dims[li];
        let mut d_prev = FeatureMatrix::zeros(layer.src_count, f_prev);
        match &model.operator {
            Operator::Gcn => {
                for e in &layer.edges.entries {
                    let da = d_agg.row(e.dst as usize);
                    let dp = d_prev.row_mut(e.src as usize);
                    for k in 0..f_prev {
                        dp[k] += e.val * da[k];
                    }
                }
            }
            Operator::Sage => {
                for (j, &own) in layer.self_rows.iter().enumerate() {
                    let da = d_agg.row(j);
                    let dp = d_prev.row_mut(own as usize);
                    for k in 0..f_prev {
                        dp[k] += da[k];
                    }
                }
                for e in &layer.edges.entries {
                    let cnt = layer.edge_counts[e.dst as usize];
                    let inv = 1.0 / cnt as f32;
                    let da = d_agg.row(e.dst as usize);
                    let dp = d_prev.row_mut(e.src as usize);
                    for k in 0..f_prev {
                        dp[k] += e.val * inv * da[f_prev + k];
                    }
                }
            }
            Operator::Custom(c) => {
                for e in &layer.edges.entries {
                    let factor = match c.gather {
                        GatherKind::Sum => 1.0,
                        GatherKind::Mean => 1.0 / layer.edge_counts[e.dst as usize].max(1) as f32,
                    };
                    let src = lc.h_prev.row(e.src as usize);
                    let da = d_agg.row(e.dst as usize);
                    let dp = d_prev.row_mut(e.src as usize);
                    for k in 0..f_prev {
                        dp[k] += (c.scatter_dfeat)(src[k], e.val) * da[k] * factor;
                    }
                }
            }
        }
        d_h = d_prev;
    }

    Ok((loss_acc as f32, grads))
}

/// Plain SGD step: `W <- W - eta * dW`, `b <- b - eta * db`.
pub fn weight_update(state: &mut TrainState, grads: &Gradients) -> Result<()> {
    let eta = state.learning_rate;
    let model = &mut state.model;
    if grads.weights.len() != model.weights.len() {
        return Err(Error::ShapeMismatch("gradient layer count mismatch".into()));
    }
    for (w, dw) in model.weights.iter_mut().zip(&grads.weights) {
        if w.rows() != dw.rows() || w.dim() != dw.dim() {
            return Err(Error::ShapeMismatch(
                "weight gradient shape mismatch".into(),
            ));
        }
        for (v, d) in w.data_mut().iter_mut().zip(dw.data()) {
            *v -= eta * d;
        }
    }
    for (b, db) in model.biases.iter_mut().zip(&grads.biases) {
        if b.len() != db.len() {
            return Err(Error::ShapeMismatch("bias gradient shape mismatch".into()));
        }
        for (v, d) in b.iter_mut().zip(db) {
            *v -= eta * d;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, CooEntry, Graph};
    use crate::model::OperatorKind;
    use crate::sampler::{rename_and_sort, sample_subgraph_node, SamplerSpec};

    fn full_graph_plan(graph: &Graph, op: OperatorKind) -> ExecutionPlan {
        let spec = SamplerSpec::subgraph(1, graph.num_vertices, 0).unwrap();
        let batch = sample_subgraph_node(graph, &spec, 0).unwrap();
        let batch = rename_and_sort(batch).unwrap();
        ExecutionPlan::new(graph, &batch, op).unwrap()
    }

    #[test]
    fn gcn_two_vertex_worked_example() {
        let edges = vec![CooEntry::new(0, 1, 1.0), CooEntry::new(1, 0, 1.0)];
        let features = FeatureMatrix::from_data(2, 2, vec![2.0, 0.0, 0.0, 4.0]).unwrap();
        let graph = Graph::new(2, edges, features.clone()).unwrap();
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        let agg = aggregate_ref(&plan.layers[0], &features, &Operator::Gcn).unwrap();
        assert_eq!(agg.row(0), &[1.0, 2.0]);
        assert_eq!(agg.row(1), &[1.0, 2.0]);
    }

    #[test]
    fn sage_self_only_mean() {
        let features = FeatureMatrix::from_data(1, 2, vec![1.0, 3.0]).unwrap();
        let graph = Graph::new(1, vec![], features.clone()).unwrap();
        let plan = full_graph_plan(&graph, OperatorKind::Sage);
        let agg = aggregate_ref(&plan.layers[0], &features, &Operator::Sage).unwrap();
        assert_eq!(agg.row(0), &[1.0, 3.0, 1.0, 3.0]);
    }

    #[test]
    fn gcn_matches_dense_oracle_random_graph() {
        let graph = generate_synthetic(30, 4.0, 8, 21);
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        let agg = aggregate_ref(&plan.layers[0], &graph.features, &Operator::Gcn).unwrap();
        // Dense normalized-adjacency product in f64.
        let n = graph.num_vertices;
        let mut hat = vec![vec![0.0f64; n]; n];
        for e in &graph.edges {
            let w = graph.gcn_edge_weight(e.src, e.dst).unwrap() as f64;
            hat[e.dst as usize][e.src as usize] += f64::from(e.val) * w;
        }
        for v in 0..n {
            hat[v][v] += 1.0 / f64::from(graph.degrees[v]);
        }
        for v in 0..n {
            for k in 0..8 {
                let mut want = 0.0f64;
                for u in 0..n {
                    want += hat[v][u] * f64::from(graph.features.row(u)[k]);
                }
                let got = f64::from(agg.row(v)[k]);
                let denom = want.abs().max(1.0);
                assert!(
                    ((got - want) / denom).abs() < 1e-6,
                    "row {v} col {k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn update_identity_passthrough() {
        let agg = FeatureMatrix::from_data(2, 2, vec![1.0, 2.0, 3.0, 0.5]).unwrap();
        let mut w = FeatureMatrix::zeros(2, 2);
        w.row_mut(0)[0] = 1.0;
        w.row_mut(1)[1] = 1.0;
        let out = update_ref(&agg, &w, &[0.0, 0.0]).unwrap();
        assert_eq!(out, agg);
    }

    #[test]
    fn update_relu_clamps() {
        let agg = FeatureMatrix::from_data(1, 2, vec![1.0, -2.0]).unwrap();
        let w = FeatureMatrix::from_data(2, 1, vec![1.0, 1.0]).unwrap();
        let out = update_ref(&agg, &w, &[0.0]).unwrap();
        assert_eq!(out.row(0), &[0.0]);
    }

    #[test]
    fn update_matches_naive_matmul() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (rows, f_in, f_out) = (7, 5, 4);
        let agg = FeatureMatrix::from_data(
            rows,
            f_in,
            (0..rows * f_in)
                .map(|_| rng.random::<f32>() - 0.5)
                .collect(),
        )
        .unwrap();
        let w = FeatureMatrix::from_data(
            f_in,
            f_out,
            (0..f_in * f_out)
                .map(|_| rng.random::<f32>() - 0.5)
                .collect(),
        )
        .unwrap();
        let b: Vec<f32> = (0..f_out).map(|_| rng.random::<f32>() - 0.5).collect();
        let got = update_ref(&agg, &w, &b).unwrap();
        for i in 0..rows {
            for o in 0..f_out {
                let mut acc = f64::from(b[o]);
                for a in 0..f_in {
                    acc += f64::from(agg.row(i)[a]) * f64::from(w.row(a)[o]);
                }
                let want = acc.max(0.0);
                assert!((f64::from(got.row(i)[o]) - want).abs() < 1e-6 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn aggregate_rejects_row_count_mismatch() {
        let graph = generate_synthetic(6, 2.0, 3, 1);
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        let wrong = FeatureMatrix::zeros(2, 3);
        assert!(matches!(
            aggregate_ref(&plan.layers[0], &wrong, &Operator::Gcn),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn update_rejects_width_mismatch() {
        let agg = FeatureMatrix::zeros(2, 3);
        let w = FeatureMatrix::zeros(4, 2);
        assert!(matches!(
            update_ref(&agg, &w, &[0.0, 0.0]),
            Err(Error::ShapeMismatch(_))
        ));
        let w = FeatureMatrix::zeros(3, 2);
        assert!(matches!(
            update_ref(&agg, &w, &[0.0]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn forward_single_layer_identity() {
        // No stored edges: aggregation is the self contribution alone
        // (weight 1), so identity weights reproduce nonnegative inputs.
        let features = FeatureMatrix::from_data(3, 2, vec![0.5, 1.0, 2.0, 0.0, 0.25, 3.0]).unwrap();
        let graph = Graph::new(3, vec![], features.clone()).unwrap();
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        let mut w = FeatureMatrix::zeros(2, 2);
        w.row_mut(0)[0] = 1.0;
        w.row_mut(1)[1] = 1.0;
        let model =
            ModelSpec::new(vec![2, 2], Operator::Gcn, vec![w], vec![vec![0.0, 0.0]]).unwrap();
        let mut state = TrainState::new(model, 0.1);
        let out = forward(&plan, &features, &mut state).unwrap();
        assert_eq!(out, features);
        assert!(state.has_cache());
    }

    #[test]
    fn forward_sage_shape_contract() {
        let graph = generate_synthetic(20, 3.0, 6, 8);
        let spec = SamplerSpec::subgraph(2, 10, 1).unwrap();
        let batch = rename_and_sort(sample_subgraph_node(&graph, &spec, 0).unwrap()).unwrap();
        let plan = ExecutionPlan::new(&graph, &batch, OperatorKind::Sage).unwrap();
        let model = ModelSpec::seeded(vec![6, 5, 3], Operator::Sage, 2).unwrap();
        let mut state = TrainState::new(model, 0.1);
        let x = plan.input_features(&graph.features).unwrap();
        let out = forward(&plan, &x, &mut state).unwrap();
        assert_eq!(out.rows(), 10);
        assert_eq!(out.dim(), 3);
    }

    #[test]
    fn uniform_logits_loss_is_ln_k() {
        let graph = generate_synthetic(6, 2.0, 3, 4);
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        // Zero weights force uniform (all-zero) logits.
        let model = ModelSpec::new(
            vec![3, 4],
            Operator::Gcn,
            vec![FeatureMatrix::zeros(3, 4)],
            vec![vec![0.0; 4]],
        )
        .unwrap();
        let mut state = TrainState::new(model, 0.1);
        forward(&plan, &graph.features, &mut state).unwrap();
        let labels = vec![0u32; 6];
        let (loss, _) = loss_and_backward(&mut state, &plan, &labels, None).unwrap();
        assert!((loss - 4.0f32.ln()).abs() < 1e-6);
    }

    #[test]
    fn zero_target_weights_zero_gradients() {
        let graph = generate_synthetic(5, 2.0, 3, 9);
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        let model = ModelSpec::seeded(vec![3, 2], Operator::Gcn, 5).unwrap();
        let mut state = TrainState::new(model, 0.1);
        forward(&plan, &graph.features, &mut state).unwrap();
        let labels = vec![0u32; 5];
        let weights = vec![0.0f32; 5];
        let (loss, grads) = loss_and_backward(&mut state, &plan, &labels, Some(&weights)).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.weights[0].data().iter().all(|&v| v == 0.0));
        assert!(grads.biases[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_requires_forward_cache() {
        let graph = generate_synthetic(5, 2.0, 3, 9);
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        let model = ModelSpec::seeded(vec![3, 2], Operator::Gcn, 5).unwrap();
        let mut state = TrainState::new(model, 0.1);
        let labels = vec![0u32; 5];
        assert!(matches!(
            loss_and_backward(&mut state, &plan, &labels, None),
            Err(Error::MissingForwardCache)
        ));
    }

    #[test]
    fn label_out_of_range_errors() {
        let graph = generate_synthetic(4, 2.0, 3, 2);
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        let model = ModelSpec::seeded(vec![3, 2], Operator::Gcn, 5).unwrap();
        let mut state = TrainState::new(model, 0.1);
        forward(&plan, &graph.features, &mut state).unwrap();
        let labels = vec![7u32; 4];
        assert!(matches!(
            loss_and_backward(&mut state, &plan, &labels, None),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_step_and_zero_grads_keep_weights() {
        let model = ModelSpec::seeded(vec![3, 2], Operator::Gcn, 5).unwrap();
        let snapshot = model.weights.clone();
        let mut state = TrainState::new(model, 0.0);
        let grads = {
            let mut g = Gradients::zeros_like(&state.model);
            g.weights[0].row_mut(0)[0] = 10.0;
            g
        };
        weight_update(&mut state, &grads).unwrap();
        assert_eq!(state.model.weights, snapshot);

        state.learning_rate = 0.5;
        let zero = Gradients::zeros_like(&state.model);
        weight_update(&mut state, &zero).unwrap();
        assert_eq!(state.model.weights, snapshot);
    }

    #[test]
    fn sgd_step_decreases_loss_on_one_layer_model() {
        let graph = generate_synthetic(8, 2.0, 4, 6);
        let plan = full_graph_plan(&graph, OperatorKind::Gcn);
        let model = ModelSpec::seeded(vec![4, 3], Operator::Gcn, 7).unwrap();
        let mut state = TrainState::new(model, 0.05);
        let labels: Vec<u32> = (0..8).map(|i| (i % 3) as u32).collect();
        forward(&plan, &graph.features, &mut state).unwrap();
        let (loss0, grads) = loss_and_backward(&mut state, &plan, &labels, None).unwrap();
        weight_update(&mut state, &grads).unwrap();
        forward(&plan, &graph.features, &mut state).unwrap();
        let (loss1, _) = loss_and_backward(&mut state, &plan, &labels, None).unwrap();
        assert!(loss1 < loss0, "loss did not decrease: {loss0} -> {loss1}");
    }
}
