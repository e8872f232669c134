//! Node-budget subgraph sampling with induced edges.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{CooEdgeList, Graph, VertexId};
use crate::sampler::{batch_rng, BatchKind, MiniBatch, SamplerKind, SamplerSpec};

/// Samples one subgraph-node mini-batch.
///
/// `SB` distinct vertices are drawn with probability proportional to
/// degree (without replacement, via a Fenwick tree over the degree table),
/// the edge set induced on them is taken whole, and the same vertex list
/// and adjacency are used for every layer.
pub fn sample_subgraph_node(
    graph: &Graph,
    spec: &SamplerSpec,
    batch_index: u64,
) -> Result<MiniBatch> {
    let SamplerKind::SubgraphNode { budget } = spec.kind else {
        return Err(Error::InvalidSpec("spec is not a subgraph sampler".into()));
    };
    if budget > graph.num_vertices {
        return Err(Error::SampleTooLarge {
            size: budget,
            num_vertices: graph.num_vertices,
        });
    }
    let mut rng = batch_rng(spec.seed, batch_index);

    let sampled: Vec<VertexId> = if budget == graph.num_vertices {
        (0..graph.num_vertices as u32).collect()
    } else {
        let mut tree = FenwickTree::new(graph.degrees.iter().map(|&d| d as f64));
        let mut picks = Vec::with_capacity(budget);
        for _ in 0..budget {
            let total = tree.total();
            debug_assert!(total > 0.0, "degree table is never all-zero (self loops)");
            let x = rng.random::<f64>() * total;
            let v = tree.find(x);
            tree.clear(v);
            picks.push(v as VertexId);
        }
        picks
    };

    let member: std::collections::HashSet<VertexId> = sampled.iter().copied().collect();
    let induced: Vec<_> = graph
        .edges
        .iter()
        .filter(|e| member.contains(&e.src) && member.contains(&e.dst))
        .copied()
        .collect();
    let adjacency = CooEdgeList::new(induced);

    Ok(MiniBatch {
        kind: BatchKind::Subgraph,
        layer_vertices: vec![sampled; spec.num_layers + 1],
        layer_adjacency: vec![adjacency; spec.num_layers],
        renamed: false,
        rename_maps: Vec::new(),
    })
}

/// Fenwick tree over nonnegative weights supporting prefix-sum search
/// and weight removal. Used for weighted sampling without replacement.
struct FenwickTree {
    tree: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl FenwickTree {
    fn new(weights: impl Iterator<Item = f64>) -> Self {
        let weights: Vec<f64> = weights.collect();
        let n = weights.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            let mut idx = i + 1;
            while idx <= n {
                tree[idx] += w;
                idx += idx & idx.wrapping_neg();
            }
        }
        let total = weights.iter().sum();
        Self {
            tree,
            weights,
            total,
        }
    }

    fn total(&self) -> f64 {
        self.total
    }

    /// Smallest index whose prefix sum exceeds `x`.
    fn find(&self, mut x: f64) -> usize {
        let n = self.weights.len();
        let mut pos = 0usize;
        let mut mask = n.next_power_of_two();
        while mask > 0 {
            let next = pos + mask;
            if next <= n && self.tree[next] <= x {
                x -= self.tree[next];
                pos = next;
            }
            mask >>= 1;
        }
        pos.min(n - 1)
    }

    fn clear(&mut self, i: usize) {
        let w = self.weights[i];
        self.weights[i] = 0.0;
        self.total -= w;
        let n = self.weights.len();
        let mut idx = i + 1;
        while idx <= n {
            self.tree[idx] -= w;
            idx += idx & idx.wrapping_neg();
        }
    }
}
