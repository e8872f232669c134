//! Graph storage, COO conversion, and degree-normalized edge weights.
//!
//! Edges are stored directed as `(src, dst, weight)` triples; undirected
//! inputs are symmetrized at load time. The degree table follows the
//! self-loop-inclusive convention `D(v) = in_degree(v) + 1`, i.e. the
//! degree of `v` in `A + I`, which is what the symmetric normalization
//! `1 / sqrt(D(u) * D(v))` consumes.

mod io;
mod synthetic;

pub use io::{load_graph, read_features, write_edge_list, write_features};
pub use synthetic::generate_synthetic;

use crate::error::{Error, Result};

/// Vertex identifier. Graphs at desk scale fit comfortably in `u32`.
pub type VertexId = u32;

/// One coordinate-format edge entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooEntry {
    pub src: VertexId,
    pub dst: VertexId,
    pub val: f32,
}

impl CooEntry {
    pub fn new(src: VertexId, dst: VertexId, val: f32) -> Self {
        Self { src, dst, val }
    }
}

/// Edge list in coordinate format, optionally sorted by source vertex.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CooEdgeList {
    pub entries: Vec<CooEntry>,
    pub sorted_by_source: bool,
}

impl CooEdgeList {
    /// Wraps an entry list, detecting whether it is already source-sorted.
    pub fn new(entries: Vec<CooEntry>) -> Self {
        let sorted = entries.windows(2).all(|w| w[0].src <= w[1].src);
        Self {
            entries,
            sorted_by_source: sorted,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stable sort by `(src, dst)`; sets the sorted flag.
    pub fn sort_by_source(&mut self) {
        self.entries.sort_by_key(|e| (e.src, e.dst));
        self.sorted_by_source = true;
    }

    /// True when `src` is nondecreasing across entries.
    pub fn is_source_sorted(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].src <= w[1].src)
    }
}

/// Dense row-major feature matrix of `f32` values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    /// Builds a matrix from row-major data, checking shape and finiteness.
    pub fn from_data(rows: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::ShapeMismatch(format!(
                "feature matrix {rows}x{dim} needs {} values, got {}",
                rows * dim,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse(
                "feature matrix contains non-finite values".into(),
            ));
        }
        Ok(Self { rows, dim, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::ShapeMismatch("ragged feature rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::from_data(rows.len(), dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f32] {
        &mut self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }
}

/// Input graph: directed edge triples, per-vertex features, and the
/// derived degree table (`in_degree + 1`, counting the `A + I` self loop).
#[derive(Debug, Clone)]
pub struct Graph {
    pub num_vertices: usize,
    pub edges: Vec<CooEntry>,
    pub features: FeatureMatrix,
    pub degrees: Vec<u32>,
    // CSR indexed by destination: in_sources[in_offsets[v]..in_offsets[v+1]]
    // lists (src, weight) pairs of edges entering v, in edge-storage order.
    in_offsets: Vec<usize>,
    in_sources: Vec<(VertexId, f32)>,
}

impl Graph {
    pub fn new(num_vertices: usize, edges: Vec<CooEntry>, features: FeatureMatrix) -> Result<Self> {
        if features.rows() != num_vertices {
            return Err(Error::ShapeMismatch(format!(
                "features have {} rows for {} vertices",
                features.rows(),
                num_vertices
            )));
        }
        for e in &edges {
            for v in [e.src, e.dst] {
                if v as usize >= num_vertices {
                    return Err(Error::VertexOutOfRange {
                        vertex: v as u64,
                        num_vertices,
                    });
                }
            }
        }

        let mut degrees = vec![1u32; num_vertices];
        let mut counts = vec![0usize; num_vertices];
        for e in &edges {
            degrees[e.dst as usize] += 1;
            counts[e.dst as usize] += 1;
        }
        let mut in_offsets = vec![0usize; num_vertices + 1];
        for v in 0..num_vertices {
            in_offsets[v + 1] = in_offsets[v] + counts[v];
        }
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![(0u32, 0f32); edges.len()];
        for e in &edges {
            let slot = cursor[e.dst as usize];
            in_sources[slot] = (e.src, e.val);
            cursor[e.dst as usize] += 1;
        }

        Ok(Self {
            num_vertices,
            edges,
            features,
            degrees,
            in_offsets,
            in_sources,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Degree of `v` in `A + I` (self loop included).
    pub fn degree(&self, v: VertexId) -> u32 {
        self.degrees[v as usize]
    }

    /// In-neighbors of `v` as `(src, weight)` pairs, in edge-storage order.
    pub fn in_neighbors(&self, v: VertexId) -> &[(VertexId, f32)] {
        &self.in_sources[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    /// Symmetric normalization weight `1 / sqrt(D(u) * D(v))`.
    pub fn gcn_edge_weight(&self, u: VertexId, v: VertexId) -> Result<f32> {
        for w in [u, v] {
            if w as usize >= self.num_vertices {
                return Err(Error::VertexOutOfRange {
                    vertex: w as u64,
                    num_vertices: self.num_vertices,
                });
            }
        }
        let du = self.degrees[u as usize];
        let dv = self.degrees[v as usize];
        if du == 0 {
            return Err(Error::IsolatedVertex(u as u64));
        }
        if dv == 0 {
            return Err(Error::IsolatedVertex(v as u64));
        }
        Ok((1.0 / ((du as f64) * (dv as f64)).sqrt()) as f32)
    }

    /// Edges in coordinate format, stably sorted by `(src, dst)`.
    pub fn to_coo_sorted(&self) -> CooEdgeList {
        let mut coo = CooEdgeList::new(self.edges.clone());
        coo.sort_by_source();
        coo
    }
}
