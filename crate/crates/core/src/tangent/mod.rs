//! Tangent-space estimation from data.
//!
//! Three routes produce orthonormal tangent bases: differentiating
//! interpolated graph-Laplacian eigenfunctions, forward differences on a
//! parameter grid of snapshots, and local PCA of point neighborhoods.

mod eigenmaps;
mod graph;
mod grid;
mod local_pca;

pub use eigenmaps::{
    eigenfunction_gradient, laplacian_eigs, tangent_from_eigenmaps, EigenmapsModel,
    DENSE_EIGEN_CUTOFF,
};
pub use graph::{build_graph, KnnGraph};
pub use grid::tangent_from_grid;
pub use local_pca::{tangent_from_local_pca, Neighborhood};

use crate::matrix::Matrix;

/// An orthonormal tangent basis at a base point, with the singular-value
/// ratio of the underlying gradient/difference matrix as a quality score.
#[derive(Debug, Clone)]
pub struct TangentPatch {
    pub base_point: Vec<f64>,
    /// n x r with orthonormal columns.
    pub basis: Matrix,
    /// sigma_r / sigma_1 in (0, 1]; small values flag near-degenerate fits.
    pub quality: f64,
}
