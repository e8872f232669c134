//! Mini-batch samplers and the data-layout transform.
//!
//! A mini-batch holds per-layer vertex lists `B^0..B^L` (targets at `B^L`)
//! and per-layer sampled adjacencies `A_s^1..A_s^L`, where every edge of
//! `A_s^l` runs from a vertex of `B^{l-1}` to a vertex of `B^l`. Samplers
//! emit batches in original vertex ids; [`rename_and_sort`] relabels each
//! layer to contiguous local ids in storage order and source-sorts every
//! adjacency, which is what lets the aggregate kernel read hidden features
//! sequentially and reuse loaded source vectors.

mod neighbor;
mod shape;
mod subgraph;

pub use neighbor::sample_neighbor;
pub use shape::{batch_shape, BatchShape, ShapeQuery};
pub use subgraph::sample_subgraph_node;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{CooEdgeList, VertexId};

/// Which sampling strategy a spec describes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplerKind {
    /// Recursive fixed-fanout sampling from the targets outward.
    Neighbor {
        target_count: usize,
        /// `NS^1..NS^L`: fanout used when expanding layer `l` down to `l-1`.
        neighbor_sizes: Vec<usize>,
    },
    /// Node-budget subgraph sampling; identical vertex set in every layer.
    SubgraphNode { budget: usize },
}

/// Sampler configuration shared by all batches of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub num_layers: usize,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn neighbor(
        num_layers: usize,
        target_count: usize,
        neighbor_sizes: Vec<usize>,
        seed: u64,
    ) -> Result<Self> {
        if neighbor_sizes.len() != num_layers {
            return Err(Error::InvalidSpec(format!(
                "neighbor sampler needs exactly {num_layers} fanout sizes, got {}",
                neighbor_sizes.len()
            )));
        }
        Ok(Self {
            kind: SamplerKind::Neighbor {
                target_count,
                neighbor_sizes,
            },
            num_layers,
            seed,
        })
    }

    pub fn subgraph(num_layers: usize, budget: usize, seed: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidSpec("subgraph budget must be >= 1".into()));
        }
        Ok(Self {
            kind: SamplerKind::SubgraphNode { budget },
            num_layers,
            seed,
        })
    }
}

/// Counter-based generator: every batch is reproducible from
/// `(spec.seed, batch_index)` and distinct batches use disjoint streams.
pub(crate) fn batch_rng(seed: u64, batch_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch_index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchKind {
    Neighbor,
    Subgraph,
}

/// One sampled mini-batch.
#[derive(Debug, Clone)]
pub struct MiniBatch {
    pub kind: BatchKind,
    /// `layer_vertices[l]` is `B^l` for `l = 0..=L`; `B^L` is the target set.
    /// Lists may repeat a vertex (with-replacement sampling keeps the layer
    /// size laws exact); each occurrence is its own storage slot.
    pub layer_vertices: Vec<Vec<VertexId>>,
    /// `layer_adjacency[l-1]` is `A_s^l` for `l = 1..=L`. Original ids
    /// before renaming, local ids afterwards.
    pub layer_adjacency: Vec<CooEdgeList>,
    pub renamed: bool,
    /// Per layer, original id -> local id of its first storage slot.
    /// Populated by [`rename_and_sort`].
    pub rename_maps: Vec<HashMap<VertexId, u32>>,
}

impl MiniBatch {
    pub fn num_layers(&self) -> usize {
        self.layer_adjacency.len()
    }

    /// `B^l` for `l = 0..=L`.
    pub fn vertices(&self, l: usize) -> &[VertexId] {
        &self.layer_vertices[l]
    }

    /// `A_s^l` for `l = 1..=L`.
    pub fn adjacency(&self, l: usize) -> &CooEdgeList {
        &self.layer_adjacency[l - 1]
    }

    /// Total vertex slots across layers (the throughput numerator).
    pub fn total_vertices(&self) -> u64 {
        self.layer_vertices.iter().map(|b| b.len() as u64).sum()
    }

    /// Line-oriented debug dump: per-layer vertex lists and edge lists.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "batch layers={} renamed={}",
            self.num_layers(),
            self.renamed
        );
        for (l, verts) in self.layer_vertices.iter().enumerate() {
            let _ = write!(out, "vertices layer={} count={}:", l, verts.len());
            for v in verts {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        for (i, adj) in self.layer_adjacency.iter().enumerate() {
            let _ = writeln!(
                out,
                "edges layer={} count={} sorted={}",
                i + 1,
                adj.len(),
                adj.sorted_by_source
            );
            for e in &adj.entries {
                let _ = writeln!(out, "{} {} {}", e.src, e.dst, e.val);
            }
        }
        out
    }
}

/// Restriction of an adjacency to sampled vertex sets: keeps exactly the
/// entries with `src` in `b_prev` and `dst` in `b_cur`, values and order
/// preserved.
pub fn induce_sampled_adjacency(
    adjacency: &CooEdgeList,
    b_prev: &[VertexId],
    b_cur: &[VertexId],
) -> CooEdgeList {
    let prev: HashSet<VertexId> = b_prev.iter().copied().collect();
    let cur: HashSet<VertexId> = b_cur.iter().copied().collect();
    let entries = adjacency
        .entries
        .iter()
        .filter(|e| prev.contains(&e.src) && cur.contains(&e.dst))
        .copied()
        .collect();
    CooEdgeList::new(entries)
}

/// Applies the layout transform: relabels each layer's vertices to
/// `0..|B^l|-1` in storage order (first occurrence wins for repeats),
/// rewrites every adjacency to local ids, and sorts it by source.
///
/// The transform is semantically a no-op: aggregation over the renamed
/// batch matches aggregation over the original batch under the inverse
/// relabeling.
pub fn rename_and_sort(mut batch: MiniBatch) -> Result<MiniBatch> {
    if batch.renamed {
        return Err(Error::AlreadyRenamed);
    }
    let maps: Vec<HashMap<VertexId, u32>> = batch
        .layer_vertices
        .iter()
        .map(|verts| {
            let mut map = HashMap::with_capacity(verts.len());
            for (i, &v) in verts.iter().enumerate() {
                map.entry(v).or_insert(i as u32);
            }
            map
        })
        .collect();

    for (i, adj) in batch.layer_adjacency.iter_mut().enumerate() {
        let src_map = &maps[i];
        let dst_map = &maps[i + 1];
        for e in &mut adj.entries {
            e.src = *src_map.get(&e.src).ok_or_else(|| {
                Error::InvalidSpec(format!("edge source {} not in layer {} vertices", e.src, i))
            })?;
            e.dst = *dst_map.get(&e.dst).ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "edge destination {} not in layer {} vertices",
                    e.dst,
                    i + 1
                ))
            })?;
        }
        adj.sort_by_source();
    }
    batch.rename_maps = maps;
    batch.renamed = true;
    Ok(batch)
}
