//! Evaluation of coordinate selections: locally linear and subspace
//! reconstruction, noise amplification over patches, the POD+DEIM baseline,
//! and distance-weighted k-NN regression in the selected coordinates.

use crate::error::{Error, Result};
use crate::linalg::{pqr, thin_svd};
use crate::matrix::Matrix;
use crate::simpqr::PatchSet;
use crate::tangent::TangentPatch;
use rayon::prelude::*;
use serde::Serialize;

/// Singular values below this fraction of the largest are treated as zero
/// when forming pseudo-inverses.
pub const PINV_CUTOFF_REL: f64 = 1e-12;

/// Order statistics of a nonnegative sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SummaryStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return SummaryStats {
                min: f64::NAN,
                median: f64::NAN,
                max: f64::NAN,
                mean: f64::NAN,
            };
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        SummaryStats {
            min: sorted[0],
            median,
            max: sorted[n - 1],
            mean: sorted.iter().sum::<f64>() / n as f64,
        }
    }
}

/// Reconstruct a point from its sampled coordinates through the locally
/// linear approximation around the patch base point:
/// `x_hat = base + U (P^T U)^+ P^T (x - base)`.
///
/// Fails when the sampled sub-basis loses column rank.
pub fn locally_linear_reconstruct(
    x: &[f64],
    patch: &TangentPatch,
    coords: &[usize],
) -> Result<Vec<f64>> {
    let r = patch.basis.cols();
    let sampled = patch.basis.select_rows(coords);
    let svd = thin_svd(&sampled);
    if svd.rank(PINV_CUTOFF_REL) < r {
        return Err(Error::SingularProjection {
            detail: format!("{} coordinates sample a rank-deficient basis", coords.len()),
        });
    }
    let residual_sampled: Vec<f64> = coords
        .iter()
        .map(|&c| x[c] - patch.base_point[c])
        .collect();
    let z = svd.pinv_apply(&residual_sampled, PINV_CUTOFF_REL);
    let mut out = patch.base_point.clone();
    for (i, o) in out.iter_mut().enumerate() {
        for (l, zl) in z.iter().enumerate() {
            *o += patch.basis.get(i, l) * zl;
        }
    }
    Ok(out)
}

/// Subspace reconstruction from sampled coordinates:
/// `x_hat = U (P^T U)^+ P^T x`.
pub fn linear_deim_reconstruct(x: &[f64], basis: &Matrix, coords: &[usize]) -> Result<Vec<f64>> {
    let r = basis.cols();
    let sampled = basis.select_rows(coords);
    let svd = thin_svd(&sampled);
    if svd.rank(PINV_CUTOFF_REL) < r {
        return Err(Error::SingularProjection {
            detail: format!("{} coordinates sample a rank-deficient basis", coords.len()),
        });
    }
    let sampled_x: Vec<f64> = coords.iter().map(|&c| x[c]).collect();
    let z = svd.pinv_apply(&sampled_x, PINV_CUTOFF_REL);
    Ok((0..basis.rows())
        .map(|i| (0..r).map(|l| basis.get(i, l) * z[l]).sum())
        .collect())
}

/// Worst-case noise gain of the locally linear reconstruction per patch:
/// the largest singular value of `(P^T U_k)^+`, i.e. `1 / sigma_min`.
#[derive(Debug, Clone, Serialize)]
pub struct AmplificationReport {
    /// One value per patch; `+inf` for singular patches.
    pub per_patch: Vec<f64>,
    /// Patches whose sampled sub-basis is rank deficient.
    pub singular_patches: Vec<usize>,
    pub summary: SummaryStats,
}

pub fn amplification(patches: &PatchSet, coords: &[usize]) -> AmplificationReport {
    let r = patches.intrinsic_dim();
    let per_patch: Vec<f64> = patches
        .bases()
        .par_iter()
        .map(|u| {
            let sampled = u.select_rows(coords);
            if sampled.rows() < r {
                return f64::INFINITY;
            }
            let svd = thin_svd(&sampled);
            let smin = svd.s[r - 1];
            if smin <= PINV_CUTOFF_REL * svd.s[0].max(1.0) {
                f64::INFINITY
            } else {
                1.0 / smin
            }
        })
        .collect();
    let singular_patches: Vec<usize> = per_patch
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_finite())
        .map(|(k, _)| k)
        .collect();
    let summary = SummaryStats::from_values(&per_patch);
    AmplificationReport {
        per_patch,
        singular_patches,
        summary,
    }
}

/// How to center snapshot rows before the proper orthogonal decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Centering {
    None,
    /// Subtract the column-wise mean of the snapshots.
    Mean,
    /// Subtract a fixed state (an equilibrium, say).
    Vector(Vec<f64>),
}

fn center_rows(snapshots: &Matrix, centering: &Centering) -> Result<Matrix> {
    match centering {
        Centering::None => Ok(snapshots.clone()),
        Centering::Mean => {
            let (m, n) = (snapshots.rows(), snapshots.cols());
            let mut mean = vec![0.0; n];
            for i in 0..m {
                for (acc, v) in mean.iter_mut().zip(snapshots.row(i)) {
                    *acc += v / m as f64;
                }
            }
            Ok(Matrix::from_fn(m, n, |i, j| snapshots.get(i, j) - mean[j]))
        }
        Centering::Vector(v) => {
            if v.len() != snapshots.cols() {
                return Err(Error::DimensionMismatch {
                    context: "centering vector",
                    expected: snapshots.cols(),
                    got: v.len(),
                });
            }
            Ok(Matrix::from_fn(snapshots.rows(), snapshots.cols(), |i, j| {
                snapshots.get(i, j) - v[j]
            }))
        }
    }
}

/// POD+DEIM baseline: select `r` coordinates by pivoted QR on the leading
/// `r` POD modes of the (centered) snapshot matrix. Returns the selected
/// coordinates in pivot order together with the n x r mode basis.
pub fn deim_baseline(
    snapshots: &Matrix,
    r: usize,
    centering: &Centering,
) -> Result<(Vec<usize>, Matrix)> {
    if r == 0 || r > snapshots.rows().min(snapshots.cols()) {
        return Err(Error::InvalidConfig {
            field: "r",
            message: format!("mode count {r} out of range"),
        });
    }
    let centered = center_rows(snapshots, centering)?;
    let svd = thin_svd(&centered);
    if svd.rank(1e-12) < r {
        return Err(Error::RankExceeded {
            requested: r,
            numerical_rank: svd.rank(1e-12),
        });
    }
    let modes = Matrix::from_fn(snapshots.cols(), r, |i, j| svd.v.get(i, j));
    let factor = pqr(&modes.transpose(), 0.0)?;
    Ok((factor.pivots[..r].to_vec(), modes))
}

/// Relative reconstruction errors of a k-NN regression.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorDistribution {
    pub relative_errors: Vec<f64>,
    pub summary: SummaryStats,
}

/// Distance-weighted k-nearest-neighbor reconstruction: for each test
/// point, measure the selected coordinates, find the `k` nearest training
/// points in those coordinates, and predict the remaining coordinates as
/// the inverse-distance-weighted average of the neighbors. An exact
/// coordinate match returns that training point's values (the weight
/// limit). Errors are `||x_hat - x|| / ||x||` over full state vectors.
pub fn knn_reconstruct(
    train: &Matrix,
    coords: &[usize],
    test: &Matrix,
    k: usize,
) -> Result<ErrorDistribution> {
    if k < 1 || train.rows() == 0 {
        return Err(Error::InvalidConfig {
            field: "k",
            message: "need k >= 1 and nonempty training data".into(),
        });
    }
    if train.cols() != test.cols() {
        return Err(Error::DimensionMismatch {
            context: "knn test dimension",
            expected: train.cols(),
            got: test.cols(),
        });
    }
    let n = train.cols();
    let complement: Vec<usize> = (0..n).filter(|j| !coords.contains(j)).collect();
    let k = k.min(train.rows());

    let relative_errors: Vec<f64> = (0..test.rows())
        .into_par_iter()
        .map(|t| {
            let x = test.row(t);
            let mut dist: Vec<(f64, usize)> = (0..train.rows())
                .map(|i| {
                    let d: f64 = coords
                        .iter()
                        .map(|&c| (train.get(i, c) - x[c]) * (train.get(i, c) - x[c]))
                        .sum();
                    (d.sqrt(), i)
                })
                .collect();
            dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dist.truncate(k);

            let mut x_hat = x.to_vec();
            if dist[0].0 == 0.0 {
                let i = dist[0].1;
                for &c in &complement {
                    x_hat[c] = train.get(i, c);
                }
            } else {
                let weights: Vec<f64> = dist.iter().map(|&(d, _)| 1.0 / d).collect();
                let total: f64 = weights.iter().sum();
                for &c in &complement {
                    x_hat[c] = dist
                        .iter()
                        .zip(&weights)
                        .map(|(&(_, i), w)| w * train.get(i, c))
                        .sum::<f64>()
                        / total;
                }
            }
            let err: f64 = x_hat
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                err / norm
            } else {
                err
            }
        })
        .collect();

    let summary = SummaryStats::from_values(&relative_errors);
    Ok(ErrorDistribution {
        relative_errors,
        summary,
    })
}

/// Cumulative fractions of total variance captured by the leading POD
/// modes of the (centered) snapshots.
pub fn pod_spectrum(snapshots: &Matrix, centering: &Centering) -> Result<Vec<f64>> {
    let centered = center_rows(snapshots, centering)?;
    let svd = thin_svd(&centered);
    let total: f64 = svd.s.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Ok(vec![]);
    }
    let mut acc = 0.0;
    Ok(svd
        .s
        .iter()
        .map(|s| {
            acc += s * s / total;
            acc
        })
        .collect())
}
