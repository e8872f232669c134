//! Synthetic graph generation for tests and experiments.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{CooEntry, FeatureMatrix, Graph};

/// Generates a directed Erdős–Rényi style graph.
///
/// Every ordered pair `(u, v)` with `u != v` carries an edge independently
/// with probability `avg_degree / (n - 1)`, so the expected edge count is
/// exactly `num_vertices * avg_degree`. Edges are produced by geometric
/// gap skipping over the pair index space, which keeps generation O(edges)
/// and fully deterministic for a fixed seed. Weights are 1.0 and features
/// are uniform in [-1, 1).
pub fn generate_synthetic(
    num_vertices: usize,
    avg_degree: f64,
    feature_dim: usize,
    seed: u64,
) -> Graph {
    assert!(avg_degree >= 0.0, "avg_degree must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = num_vertices;
    let mut edges = Vec::new();

    if n >= 2 && avg_degree > 0.0 {
        let pairs = (n as u64) * (n as u64 - 1);
        let p = (avg_degree / (n as f64 - 1.0)).min(1.0);
        if p >= 1.0 {
            for k in 0..pairs {
                edges.push(pair_to_edge(k, n));
            }
        } else {
            let ln_q = (1.0 - p).ln();
            let mut k: u64 = 0;
            loop {
                // u in (0, 1] so ln(u) is finite; gap >= 0.
                let u = 1.0 - rng.random::<f64>();
                let gap = (u.ln() / ln_q).floor();
                if !gap.is_finite() || gap >= (pairs - k) as f64 {
                    break;
                }
                k += gap as u64;
                edges.push(pair_to_edge(k, n));
                k += 1;
                if k >= pairs {
                    break;
                }
            }
        }
    }

    let mut data = vec![0f32; n * feature_dim];
    for v in &mut data {
        *v = rng.random::<f32>() * 2.0 - 1.0;
    }
    let features = FeatureMatrix::from_data(n, feature_dim, data).expect("generated features");
    Graph::new(n, edges, features).expect("generated graph is valid")
}

// Maps a pair index in [0, n*(n-1)) to the ordered pair (u, v), u != v.
fn pair_to_edge(k: u64, n: usize) -> CooEntry {
    let row = (k / (n as u64 - 1)) as u32;
    let rem = (k % (n as u64 - 1)) as u32;
    let col = if rem >= row { rem + 1 } else { rem };
    CooEntry::new(row, col, 1.0)
}
