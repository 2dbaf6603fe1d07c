//! Tangent bases from forward differences on a parameter grid.

use super::TangentPatch;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Relative rank threshold for dropping degenerate cells.
const RANK_TOL: f64 = 1e-10;

/// Orthonormalized forward differences at every grid cell.
///
/// `grid[i][j]` is the state at time index `i` and parameter index `j`;
/// the cell at `(i, j)` uses the differences towards `(i+1, j)` and
/// `(i, j+1)`, so only cells with both indices below the last produce a
/// patch. Rank-deficient cells (zero or collinear differences) are dropped
/// and returned in the second list.
pub fn tangent_from_grid(grid: &[Vec<Vec<f64>>]) -> Result<(Vec<TangentPatch>, Vec<(usize, usize)>)> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidConfig {
            field: "grid",
            message: format!("need at least a 2x2 grid, got {rows}x{cols}"),
        });
    }
    let n = grid[0][0].len();
    for row in grid {
        if row.len() != cols || row.iter().any(|u| u.len() != n) {
            return Err(Error::InvalidConfig {
                field: "grid",
                message: "grid must be rectangular with equal state dimensions".into(),
            });
        }
    }

    let mut patches = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            let base = &grid[i][j];
            let v_t: Vec<f64> = grid[i + 1][j].iter().zip(base).map(|(a, b)| a - b).collect();
            let v_p: Vec<f64> = grid[i][j + 1].iter().zip(base).map(|(a, b)| a - b).collect();

            let nt: f64 = v_t.iter().map(|x| x * x).sum::<f64>().sqrt();
            let np: f64 = v_p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nt == 0.0 || np == 0.0 {
                log::warn!("grid tangents: zero difference vector at cell ({i}, {j}), dropped");
                dropped.push((i, j));
                continue;
            }
            let q1: Vec<f64> = v_t.iter().map(|x| x / nt).collect();
            let dot: f64 = q1.iter().zip(&v_p).map(|(a, b)| a * b).sum();
            let mut q2: Vec<f64> = v_p.iter().zip(&q1).map(|(a, b)| a - dot * b).collect();
            let nq2: f64 = q2.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nq2 <= RANK_TOL * np {
                dropped.push((i, j));
                continue;
            }
            q2.iter_mut().for_each(|x| *x /= nq2);

            // Singular values of [v_t | v_p] from its 2x2 Gram matrix.
            let g11 = nt * nt;
            let g22 = np * np;
            let g12: f64 = v_t.iter().zip(&v_p).map(|(a, b)| a * b).sum();
            let tr = g11 + g22;
            let disc = ((g11 - g22).powi(2) + 4.0 * g12 * g12).sqrt();
            let s1 = (0.5 * (tr + disc)).max(0.0).sqrt();
            let s2 = (0.5 * (tr - disc)).max(0.0).sqrt();

            patches.push(TangentPatch {
                base_point: base.clone(),
                basis: Matrix::from_fn(n, 2, |row, col| if col == 0 { q1[row] } else { q2[row] }),
                quality: if s1 > 0.0 { s2 / s1 } else { 0.0 },
            });
        }
    }
    Ok((patches, dropped))
}
