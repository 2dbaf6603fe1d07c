//! Secant tangent approximation by local principal component analysis.

use super::TangentPatch;
use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::matrix::Matrix;

/// How to gather the local point set around a center.
#[derive(Debug, Clone, Copy)]
pub enum Neighborhood {
    /// The `k` nearest points (excluding the center itself).
    Count(usize),
    /// All points within the given radius of the center.
    Radius(f64),
}

/// Leading-r principal directions of the centered neighbor set around
/// `center_index`. Requires at least `r + 1` neighbors besides the center.
pub fn tangent_from_local_pca(
    points: &Matrix,
    center_index: usize,
    neighborhood: Neighborhood,
    r: usize,
) -> Result<TangentPatch> {
    let m = points.rows();
    let n = points.cols();
    let center = points.row(center_index);

    let mut neighbors: Vec<usize> = match neighborhood {
        Neighborhood::Count(k) => {
            let mut d: Vec<(f64, usize)> = (0..m)
                .filter(|&j| j != center_index)
                .map(|j| {
                    let dist: f64 = points
                        .row(j)
                        .iter()
                        .zip(center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (dist, j)
                })
                .collect();
            d.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.truncate(k);
            d.into_iter().map(|(_, j)| j).collect()
        }
        Neighborhood::Radius(rad) => (0..m)
            .filter(|&j| {
                j != center_index && {
                    let dist: f64 = points
                        .row(j)
                        .iter()
                        .zip(center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    dist.sqrt() <= rad
                }
            })
            .collect(),
    };
    if neighbors.len() < r + 1 {
        return Err(Error::InsufficientNeighbors {
            needed: r + 1,
            got: neighbors.len(),
        });
    }
    neighbors.push(center_index);

    let count = neighbors.len();
    let mut mean = vec![0.0; n];
    for &j in &neighbors {
        for (acc, v) in mean.iter_mut().zip(points.row(j)) {
            *acc += v / count as f64;
        }
    }
    let centered = Matrix::from_fn(count, n, |i, col| points.get(neighbors[i], col) - mean[col]);
    let svd = thin_svd(&centered);
    if svd.s.len() < r || svd.s[0] <= 0.0 || svd.s[r - 1] <= 0.0 {
        return Err(Error::SingularProjection {
            detail: format!("neighborhood of point {center_index} has rank below {r}"),
        });
    }
    Ok(TangentPatch {
        base_point: center.to_vec(),
        basis: Matrix::from_fn(n, r, |i, j| svd.v.get(i, j)),
        quality: svd.s[r - 1] / svd.s[0],
    })
}
