//! Nonlinear DEIM: selecting a small subset of the original coordinates that
//! immerses (and, with branch coordinates, embeds) a data manifold.
//!
//! The core algorithm is a simultaneously pivoted Householder QR (SimPQR)
//! run jointly over a collection of orthonormal tangent-space bases, with a
//! trade-off parameter `gamma` between sharing pivot coordinates across
//! patches and per-patch factorization volume. Around it sit tangent-space
//! estimation from data (graph Laplacian eigenmaps, parameter grids, local
//! PCA), branch-coordinate discovery that upgrades an immersion to an
//! embedding, dataset generators, and evaluation against the classical
//! POD+DEIM baseline.

pub mod branching;
pub mod datasets;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod matrix;
pub mod simpqr;
pub mod tangent;

pub use error::{Error, Result};
pub use matrix::Matrix;
