//! Synthetic manifolds with analytic tangent bases, a periodic viscous
//! Burgers solver, and the matrix file formats.

mod burgers;
mod io;
mod manifolds;

pub use burgers::{burgers_grid, burgers_grid_with_cfl, snapshot_grid, BurgersRun};
pub use io::{
    load_matrix, load_patch_set, save_matrix, save_matrix_csv, save_patch_set, MATRIX_MAGIC,
};
pub use manifolds::{gen_cylinder, gen_spiral, gen_surface10, ManifoldSample};
