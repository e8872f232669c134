//! Closed-form per-layer batch shapes.

use crate::error::{Error, Result};
use crate::perf::SparsityModel;
use crate::sampler::{SamplerKind, SamplerSpec};

/// Shape query covering the implemented samplers plus the layer-wise
/// row, whose batch-shape formula is supported even though no layer-wise
/// sampler exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShapeQuery {
    Neighbor {
        target_count: usize,
        neighbor_sizes: Vec<usize>,
    },
    SubgraphNode {
        budget: usize,
        num_layers: usize,
    },
    LayerWise {
        /// `S^0..S^L`.
        layer_sizes: Vec<usize>,
    },
}

impl ShapeQuery {
    pub fn from_spec(spec: &SamplerSpec) -> Self {
        match &spec.kind {
            SamplerKind::Neighbor {
                target_count,
                neighbor_sizes,
            } => ShapeQuery::Neighbor {
                target_count: *target_count,
                neighbor_sizes: neighbor_sizes.clone(),
            },
            SamplerKind::SubgraphNode { budget } => ShapeQuery::SubgraphNode {
                budget: *budget,
                num_layers: spec.num_layers,
            },
        }
    }
}

/// Predicted per-layer sizes: `vertices[l] = |B^l|` for `l = 0..=L` and
/// `edges[l-1] = |E^l|` for `l = 1..=L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchShape {
    pub vertices: Vec<u64>,
    pub edges: Vec<u64>,
}

impl BatchShape {
    pub fn num_layers(&self) -> usize {
        self.edges.len()
    }

    pub fn total_vertices(&self) -> u64 {
        self.vertices.iter().sum()
    }
}

/// Evaluates the per-layer shape table.
///
/// Neighbor shapes are the exact products `|B^l| = |V^t| * prod NS^i` and
/// `|E^l| = |B^l| * NS^l`. Subgraph and layer-wise shapes estimate edges
/// as `|B^l| * |B^{l-1}| * kappa(|B^l|)` with the fitted sparsity model,
/// which those queries require (except for the degenerate zero-budget
/// case, which is all zeros).
pub fn batch_shape(query: &ShapeQuery, sparsity: Option<&SparsityModel>) -> Result<BatchShape> {
    match query {
        ShapeQuery::Neighbor {
            target_count,
            neighbor_sizes,
        } => {
            let num_layers = neighbor_sizes.len();
            let mut vertices = vec![0u64; num_layers + 1];
            let mut edges = vec![0u64; num_layers];
            vertices[num_layers] = *target_count as u64;
            for l in (1..=num_layers).rev() {
                let fanout = neighbor_sizes[l - 1] as u64;
                edges[l - 1] = vertices[l] * fanout;
                vertices[l - 1] = vertices[l] * fanout;
            }
            Ok(BatchShape { vertices, edges })
        }
        ShapeQuery::SubgraphNode { budget, num_layers } => {
            let b = *budget as u64;
            let e = if b == 0 {
                0
            } else {
                let model = sparsity.ok_or(Error::MissingSparsityModel)?;
                predicted_edges(b, b, model)
            };
            Ok(BatchShape {
                vertices: vec![b; num_layers + 1],
                edges: vec![e; *num_layers],
            })
        }
        ShapeQuery::LayerWise { layer_sizes } => {
            if layer_sizes.len() < 2 {
                return Err(Error::InvalidSpec(
                    "layer-wise query needs sizes S^0..S^L".into(),
                ));
            }
            let vertices: Vec<u64> = layer_sizes.iter().map(|&s| s as u64).collect();
            let mut edges = Vec::with_capacity(vertices.len() - 1);
            for l in 1..vertices.len() {
                let e = if vertices[l] == 0 || vertices[l - 1] == 0 {
                    0
                } else {
                    let model = sparsity.ok_or(Error::MissingSparsityModel)?;
                    predicted_edges(vertices[l], vertices[l - 1], model)
                };
                edges.push(e);
            }
            Ok(BatchShape { vertices, edges })
        }
    }
}

fn predicted_edges(b_cur: u64, b_prev: u64, model: &SparsityModel) -> u64 {
    let density = model.kappa(b_cur);
    ((b_cur as f64) * (b_prev as f64) * density).round() as u64
}
