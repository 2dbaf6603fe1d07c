//! Symmetrized k-nearest-neighbor graph with Gaussian kernel weights.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use rayon::prelude::*;

/// Neighborhood graph over data points.
///
/// Adjacency is symmetric: an edge joins `i` and `k` when either is among
/// the other's `k` nearest neighbors. Edge weights use the Gaussian kernel
/// `exp(-0.5 (d / sigma)^2)` with a symmetric local scale `sigma` equal to
/// `alpha` times the RMS of the two endpoints' neighbor distances.
#[derive(Debug, Clone)]
pub struct KnnGraph {
    pub node_count: usize,
    /// Sorted neighbor lists after symmetrization.
    pub neighbor_lists: Vec<Vec<usize>>,
    /// Edge weights aligned with `neighbor_lists`.
    pub weights: Vec<Vec<f64>>,
    /// Local scales aligned with `neighbor_lists`.
    pub local_scales: Vec<Vec<f64>>,
    /// Weighted degree of each node.
    pub degrees: Vec<f64>,
    pub alpha: f64,
    pub k: usize,
}

impl KnnGraph {
    /// Index of `neighbor` inside node `i`'s list, if present.
    pub fn edge_slot(&self, i: usize, neighbor: usize) -> Option<usize> {
        self.neighbor_lists[i].binary_search(&neighbor).ok()
    }

    /// Apply the Laplacian `L = D - W` to a node function.
    pub fn laplacian_apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.node_count {
            let mut acc = self.degrees[i] * x[i];
            for (&nb, &w) in self.neighbor_lists[i].iter().zip(&self.weights[i]) {
                acc -= w * x[nb];
            }
            out[i] = acc;
        }
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.node_count];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                for &nb in &self.neighbor_lists[i] {
                    if !seen[nb] {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
        }
        components
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Build the symmetrized k-NN graph over the rows of `points`.
///
/// Duplicate points (zero pairwise distance) get kernel weight 1; their
/// count is logged.
pub fn build_graph(points: &Matrix, k: usize, alpha: f64) -> Result<KnnGraph> {
    let m = points.rows();
    if k < 1 || m <= k {
        return Err(Error::InvalidConfig {
            field: "k",
            message: format!("need m > k >= 1, got m = {m}, k = {k}"),
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidConfig {
            field: "alpha",
            message: format!("must be positive, got {alpha}"),
        });
    }

    // Directed k-NN lists; ties broken by index for determinism.
    let knn: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..m)
                .filter(|&j| j != i)
                .map(|j| (dist_sq(points.row(i), points.row(j)), j))
                .collect();
            d.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.truncate(k);
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    // Symmetrize: edge when either endpoint lists the other.
    let mut neighbor_lists: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, list) in knn.iter().enumerate() {
        for &j in list {
            neighbor_lists[i].push(j);
            neighbor_lists[j].push(i);
        }
    }
    for list in &mut neighbor_lists {
        list.sort_unstable();
        list.dedup();
    }

    // Mean squared neighbor distance per node.
    let mean_sq: Vec<f64> = (0..m)
        .map(|i| {
            let list = &neighbor_lists[i];
            list.iter()
                .map(|&j| dist_sq(points.row(i), points.row(j)))
                .sum::<f64>()
                / list.len() as f64
        })
        .collect();

    let mut weights = vec![Vec::new(); m];
    let mut local_scales = vec![Vec::new(); m];
    let mut zero_distance_pairs = 0usize;
    for i in 0..m {
        for &j in &neighbor_lists[i] {
            let sigma = alpha * (0.5 * mean_sq[i] + 0.5 * mean_sq[j]).sqrt();
            let d2 = dist_sq(points.row(i), points.row(j));
            let w = if d2 == 0.0 {
                if i < j {
                    zero_distance_pairs += 1;
                }
                1.0
            } else {
                (-0.5 * d2 / (sigma * sigma)).exp()
            };
            weights[i].push(w);
            local_scales[i].push(sigma);
        }
    }
    if zero_distance_pairs > 0 {
        log::warn!(
            "knn graph: {zero_distance_pairs} duplicate point pair(s) at zero distance, kernel weight pinned to 1"
        );
    }

    let degrees = weights.iter().map(|row| row.iter().sum()).collect();
    Ok(KnnGraph {
        node_count: m,
        neighbor_lists,
        weights,
        local_scales,
        degrees,
        alpha,
        k,
    })
}
