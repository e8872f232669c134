//! Recursive fixed-fanout neighbor sampling.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{CooEdgeList, CooEntry, Graph};
use crate::sampler::{batch_rng, BatchKind, MiniBatch, SamplerKind, SamplerSpec};

/// Samples one neighbor-sampling mini-batch.
///
/// Targets are drawn uniformly without replacement. Expanding layer `l`
/// down to `l-1`, each slot `v` of `B^l` draws `NS^l` in-neighbors
/// uniformly with replacement; a slot with no in-neighbors contributes
/// `NS^l` copies of a self edge instead, so the layer size laws
/// `|B^{l-1}| = |B^l| * NS^l` and `|E^l| = |B^l| * NS^l` hold exactly.
pub fn sample_neighbor(graph: &Graph, spec: &SamplerSpec, batch_index: u64) -> Result<MiniBatch> {
    let SamplerKind::Neighbor {
        target_count,
        ref neighbor_sizes,
    } = spec.kind
    else {
        return Err(Error::InvalidSpec("spec is not a neighbor sampler".into()));
    };
    if target_count > graph.num_vertices {
        return Err(Error::SampleTooLarge {
            size: target_count,
            num_vertices: graph.num_vertices,
        });
    }
    let num_layers = spec.num_layers;
    let mut rng = batch_rng(spec.seed, batch_index);

    let targets: Vec<u32> = rand::seq::index::sample(&mut rng, graph.num_vertices, target_count)
        .into_iter()
        .map(|i| i as u32)
        .collect();

    let mut layer_vertices: Vec<Vec<u32>> = vec![Vec::new(); num_layers + 1];
    let mut layer_adjacency: Vec<CooEdgeList> = Vec::with_capacity(num_layers);
    layer_vertices[num_layers] = targets;

    for l in (1..=num_layers).rev() {
        let fanout = neighbor_sizes[l - 1];
        let current = &layer_vertices[l];
        let mut below = Vec::with_capacity(current.len() * fanout);
        let mut edges = Vec::with_capacity(current.len() * fanout);
        for &v in current {
            let neighbors = graph.in_neighbors(v);
            for _ in 0..fanout {
                if neighbors.is_empty() {
                    below.push(v);
                    edges.push(CooEntry::new(v, v, 1.0));
                } else {
                    let (u, w) = neighbors[rng.random_range(0..neighbors.len())];
                    below.push(u);
                    edges.push(CooEntry::new(u, v, w));
                }
            }
        }
        layer_vertices[l - 1] = below;
        layer_adjacency.push(CooEdgeList::new(edges));
    }
    layer_adjacency.reverse();

    Ok(MiniBatch {
        kind: BatchKind::Neighbor,
        layer_vertices,
        layer_adjacency,
        renamed: false,
        rename_maps: Vec::new(),
    })
}
