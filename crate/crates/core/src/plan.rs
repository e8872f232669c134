//! Lowering of a renamed mini-batch into per-layer kernel streams.
//!
//! Both the reference implementation and the simulator consume the same
//! prepared form of a batch: per layer, a source-sorted COO stream over
//! local row indices whose values already carry the operator's edge
//! weights, plus bookkeeping for each destination's own contribution.
//!
//! The `union {v}` term of the built-in operators needs every
//! destination's previous-layer feature. Subgraph batches have identical
//! layers, so a destination's own row is simply its slot in the source
//! layer. Neighbor batches sample strictly downward, so destinations of
//! layer `l` are carried through the computation of layers below them:
//! the rows computed at layer `l` are `B^l` followed by `B^{l+1}..B^L`,
//! making the source rows of layer `l` exactly `B^{l-1}` followed by the
//! rows computed at layer `l`. A destination slot `j` then always finds
//! its own previous feature at source row `|B^{l-1}| + j`. Carried slots
//! have no sampled edges and aggregate only their self contribution.
//!
//! Self contributions are materialized as explicit edges: weight
//! `1/D(v)` for the normalized operator, 1.0 for the mean operator.
//! Custom operators are pure scatter-gather and get neither self edges
//! nor carried rows.

use crate::error::{Error, Result};
use crate::graph::{CooEdgeList, CooEntry, FeatureMatrix, Graph, VertexId};
use crate::model::OperatorKind;
use crate::sampler::{BatchKind, MiniBatch};

/// One layer's kernel-ready inputs.
#[derive(Debug, Clone)]
pub struct LayerPlan {
    /// Rows of the previous-layer feature matrix this layer consumes.
    pub src_count: usize,
    /// Rows this layer produces.
    pub dst_count: usize,
    /// Prepared edge stream: local ids, operator weights, source-sorted.
    pub edges: CooEdgeList,
    /// Per destination, the source row holding its own previous feature.
    /// Empty for custom operators.
    pub self_rows: Vec<u32>,
    /// Per destination, its edge count in the prepared stream (mean
    /// divisors for concat/mean-style gathers).
    pub edge_counts: Vec<u32>,
}

/// A mini-batch lowered for one operator.
#[derive(Debug, Clone)]
pub struct ExecutionPlan {
    pub layers: Vec<LayerPlan>,
    /// Original ids of the layer-0 input rows, in row order.
    pub input_vertices: Vec<VertexId>,
    pub operator: OperatorKind,
}

impl ExecutionPlan {
    pub fn new(graph: &Graph, batch: &MiniBatch, operator: OperatorKind) -> Result<Self> {
        if !batch.renamed {
            return Err(Error::NotRenamed);
        }
        let num_layers = batch.num_layers();
        let needs_self = operator != OperatorKind::Custom;
        let carried = needs_self && batch.kind == BatchKind::Neighbor;

        // comp_len[l]: rows computed at layer l (l = 0 means input rows).
        let mut comp_len = vec![0usize; num_layers + 1];
        for l in 0..=num_layers {
            comp_len[l] = if carried {
                batch.layer_vertices[l..].iter().map(Vec::len).sum()
            } else {
                batch.layer_vertices[l].len()
            };
        }

        let comp_vertices = |l: usize| -> Vec<VertexId> {
            if carried {
                batch.layer_vertices[l..]
                    .iter()
                    .flatten()
                    .copied()
                    .collect()
            } else {
                batch.layer_vertices[l].clone()
            }
        };

        let mut layers = Vec::with_capacity(num_layers);
        for l in 1..=num_layers {
            let src_count = comp_len[l - 1];
            let dst_count = comp_len[l];
            let base = batch.layer_vertices[l - 1].len();
            let sampled = batch.adjacency(l);

            let mut entries =
                Vec::with_capacity(sampled.len() + if needs_self { dst_count } else { 0 });
            for e in &sampled.entries {
                if e.src as usize >= batch.layer_vertices[l - 1].len()
                    || e.dst as usize >= batch.layer_vertices[l].len()
                {
                    return Err(Error::InvalidSpec(format!(
                        "layer {l} adjacency references slots outside its layers"
                    )));
                }
                let val = match operator {
                    OperatorKind::Gcn => {
                        let u = batch.layer_vertices[l - 1][e.src as usize];
                        let v = batch.layer_vertices[l][e.dst as usize];
                        e.val * graph.gcn_edge_weight(u, v)?
                    }
                    OperatorKind::Sage => 1.0,
                    OperatorKind::Custom => e.val,
                };
                entries.push(CooEntry::new(e.src, e.dst, val));
            }

            let mut self_rows = Vec::new();
            if needs_self {
                let dst_vertices = comp_vertices(l);
                self_rows.reserve(dst_count);
                for (j, &v) in dst_vertices.iter().enumerate() {
                    let self_row = if carried { (base + j) as u32 } else { j as u32 };
                    let val = match operator {
                        OperatorKind::Gcn => graph.gcn_edge_weight(v, v)?,
                        _ => 1.0,
                    };
                    entries.push(CooEntry::new(self_row, j as u32, val));
                    self_rows.push(self_row);
                }
            }

            entries.sort_by_key(|e| (e.src, e.dst));
            let mut edge_counts = vec![0u32; dst_count];
            for e in &entries {
                edge_counts[e.dst as usize] += 1;
            }
            let mut edges = CooEdgeList::new(entries);
            edges.sorted_by_source = true;

            layers.push(LayerPlan {
                src_count,
                dst_count,
                edges,
                self_rows,
                edge_counts,
            });
        }

        Ok(Self {
            layers,
            input_vertices: comp_vertices(0),
            operator,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Row count the layer-0 input feature matrix must have.
    pub fn input_rows(&self) -> usize {
        self.input_vertices.len()
    }

    /// Gathers the layer-0 input rows from the graph's feature matrix.
    pub fn input_features(&self, features: &FeatureMatrix) -> Result<FeatureMatrix> {
        let dim = features.dim();
        let mut out = FeatureMatrix::zeros(self.input_vertices.len(), dim);
        for (i, &v) in self.input_vertices.iter().enumerate() {
            if v as usize >= features.rows() {
                return Err(Error::VertexOutOfRange {
                    vertex: v as u64,
                    num_vertices: features.rows(),
                });
            }
            out.row_mut(i).copy_from_slice(features.row(v as usize));
        }
        Ok(out)
    }
}
