//! Dense linear-algebra kernels: Householder reflectors, column-pivoted QR
//! in compact form, thin SVD, and the exhaustive matrix-volume oracle.
//!
//! Everything here is a pure function of its inputs and safe to call from
//! multiple threads.

mod householder;
mod pqr;
mod svd;
mod volume;

pub use householder::{house, HouseholderStep};
pub use pqr::{permute_columns, pqr, reconstruct_qr, CompactPqr};
pub use svd::{thin_svd, ThinSvd};
pub use volume::{volume, volume_with_budget, DEFAULT_VOLUME_BUDGET};

pub(crate) use pqr::FactorState;
