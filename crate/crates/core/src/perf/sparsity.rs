//! Fitted sparsity function for subgraph-style edge-count prediction.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sampler::{sample_subgraph_node, SamplerSpec};

/// Monotone-interpolated mapping from sample size to induced edge density.
///
/// For a sample of `s` vertices the predicted induced edge count is
/// `s^2 * kappa(s)`. Each fitted point stores the empirical density mean
/// and a 95% band (1.96 sigma of the observed per-draw edge counts).
#[derive(Debug, Clone)]
pub struct SparsityModel {
    graph_label: String,
    repeats: usize,
    /// `(size, kappa, edge_count_band)` sorted by size.
    points: Vec<(u64, f64, f64)>,
}

impl SparsityModel {
    pub fn from_points(
        graph_label: &str,
        repeats: usize,
        mut points: Vec<(u64, f64, f64)>,
    ) -> Self {
        points.sort_by_key(|p| p.0);
        Self {
            graph_label: graph_label.to_string(),
            repeats,
            points,
        }
    }

    pub fn graph_label(&self) -> &str {
        &self.graph_label
    }

    pub fn repeats(&self) -> usize {
        self.repeats
    }

    pub fn points(&self) -> &[(u64, f64, f64)] {
        &self.points
    }

    /// Density at `size`: piecewise-linear between fitted sizes, clamped
    /// to the nearest fitted point outside the fitted range.
    pub fn kappa(&self, size: u64) -> f64 {
        self.interpolate(size, |p| p.1)
    }

    /// 95% band on the induced edge count at `size`, interpolated the
    /// same way as the density.
    pub fn edge_band(&self, size: u64) -> f64 {
        self.interpolate(size, |p| p.2)
    }

    /// Predicted induced edge count for a sample of `size` vertices.
    pub fn predicted_edges(&self, size: u64) -> f64 {
        (size as f64) * (size as f64) * self.kappa(size)
    }

    fn interpolate(&self, size: u64, field: impl Fn(&(u64, f64, f64)) -> f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let first = &self.points[0];
        let last = &self.points[self.points.len() - 1];
        if size <= first.0 {
            return field(first);
        }
        if size >= last.0 {
            return field(last);
        }
        let hi = self.points.partition_point(|p| p.0 < size);
        let (lo, hi) = (&self.points[hi - 1], &self.points[hi]);
        if hi.0 == lo.0 {
            return field(lo);
        }
        let t = (size - lo.0) as f64 / (hi.0 - lo.0) as f64;
        field(lo) + t * (field(hi) - field(lo))
    }
}

/// Fits a sparsity model by repeatedly sampling node-budget subgraphs at
/// each requested size and measuring the induced edge counts.
pub fn fit_sparsity(
    graph: &Graph,
    base: &SamplerSpec,
    sample_sizes: &[usize],
    repeats: usize,
) -> Result<SparsityModel> {
    if repeats == 0 {
        return Err(Error::InvalidSpec("repeats must be >= 1".into()));
    }
    let mut points = Vec::with_capacity(sample_sizes.len());
    for (i, &size) in sample_sizes.iter().enumerate() {
        if size > graph.num_vertices {
            return Err(Error::SampleTooLarge {
                size,
                num_vertices: graph.num_vertices,
            });
        }
        if size == 0 {
            points.push((0, 0.0, 0.0));
            continue;
        }
        let spec = SamplerSpec::subgraph(1, size, base.seed)?;
        let mut counts = Vec::with_capacity(repeats);
        for r in 0..repeats {
            // Disjoint rng streams per (size, repeat).
            let batch_index = (i as u64) << 32 | r as u64;
            let batch = sample_subgraph_node(graph, &spec, batch_index)?;
            counts.push(batch.adjacency(1).len() as f64);
        }
        let mean = counts.iter().sum::<f64>() / repeats as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / repeats as f64;
        let kappa = mean / ((size as f64) * (size as f64));
        points.push((size as u64, kappa, 1.96 * var.sqrt()));
    }
    Ok(SparsityModel::from_points(
        &format!("graph-v{}-e{}", graph.num_vertices, graph.num_edges()),
        repeats,
        points,
    ))
}
