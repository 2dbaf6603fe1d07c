//! Laplacian eigenmaps and tangent bases from interpolated eigenfunctions.
//!
//! The graph Laplacian `L = D - W` is symmetric positive semidefinite; on a
//! connected graph its null space is exactly the constants. The
//! eigenfunctions with the smallest strictly positive eigenvalues supply
//! intrinsic coordinates. Interpolating them off the graph through the
//! kernel weights and differentiating at a node yields vectors spanning the
//! tangent space there.

use super::graph::KnnGraph;
use super::TangentPatch;
use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::matrix::Matrix;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

/// Node count above which the dense symmetric eigensolver gives way to
/// subspace iteration on the (sparse) Laplacian.
pub const DENSE_EIGEN_CUTOFF: usize = 3000;

/// Eigenpairs of the graph Laplacian above the null-mode threshold.
#[derive(Debug, Clone)]
pub struct EigenmapsModel {
    pub graph: KnnGraph,
    /// Strictly positive eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Node-indexed eigenfunctions aligned with `eigenvalues`.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// Threshold that separated the null modes.
    pub zero_tol: f64,
}

/// Smallest `r_prime` strictly positive Laplacian eigenpairs.
///
/// `zero_tol = None` uses `1e-10` times (an upper bound on) the largest
/// eigenvalue. Fails if the graph is disconnected or the spectrum has fewer
/// positive eigenvalues than requested.
pub fn laplacian_eigs(
    graph: KnnGraph,
    r_prime: usize,
    zero_tol: Option<f64>,
) -> Result<EigenmapsModel> {
    if r_prime < 1 {
        return Err(Error::InvalidConfig {
            field: "r_prime",
            message: "need at least one eigenfunction".into(),
        });
    }
    let components = graph.component_count();
    if components != 1 {
        return Err(Error::GraphDisconnected { components });
    }
    let m = graph.node_count;

    let (eigenvalues, eigenfunctions, zero_tol) = if m <= DENSE_EIGEN_CUTOFF {
        dense_positive_eigs(&graph, r_prime, zero_tol)?
    } else {
        iterative_positive_eigs(&graph, r_prime, zero_tol)?
    };

    Ok(EigenmapsModel {
        graph,
        eigenvalues,
        eigenfunctions,
        zero_tol,
    })
}

/// Fix the sign of an eigenvector: its largest-magnitude entry is positive.
fn canonicalize_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn dense_positive_eigs(
    graph: &KnnGraph,
    r_prime: usize,
    zero_tol: Option<f64>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let m = graph.node_count;
    let mut lap = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        lap[(i, i)] = graph.degrees[i];
        for (&j, &w) in graph.neighbor_lists[i].iter().zip(&graph.weights[i]) {
            lap[(i, j)] = -w;
        }
    }
    let eig = SymmetricEigen::new(lap);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let lambda_max = eig.eigenvalues[order[m - 1]];
    let tol = zero_tol.unwrap_or(1e-10 * lambda_max);

    let mut values = Vec::with_capacity(r_prime);
    let mut functions = Vec::with_capacity(r_prime);
    for &idx in &order {
        let lambda = eig.eigenvalues[idx];
        if lambda <= tol {
            continue;
        }
        let mut f: Vec<f64> = (0..m).map(|i| eig.eigenvectors[(i, idx)]).collect();
        canonicalize_sign(&mut f);
        values.push(lambda);
        functions.push(f);
        if values.len() == r_prime {
            break;
        }
    }
    if values.len() < r_prime {
        return Err(Error::SpectrumExhausted {
            requested: r_prime,
            available: values.len(),
        });
    }
    Ok((values, functions, tol))
}

/// Subspace iteration on the shifted operator `c I - L` with the constant
/// mode deflated; the largest shifted eigenvalues are the smallest positive
/// Laplacian eigenvalues. Only matrix-vector products with the sparse
/// Laplacian are used.
fn iterative_positive_eigs(
    graph: &KnnGraph,
    r_prime: usize,
    zero_tol: Option<f64>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let m = graph.node_count;
    let shift = 2.0 * graph.degrees.iter().cloned().fold(0.0, f64::max);
    let tol = zero_tol.unwrap_or(1e-10 * shift);
    let block = (r_prime + 8).min(m - 1);
    let max_iters = 5000;
    let conv_tol = 1e-10;

    // Deterministic pseudo-random start block.
    let mut state = 0x853c49e6748fea9bu64;
    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            (0..m)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect()
        })
        .collect();

    let ones = 1.0 / (m as f64).sqrt();
    let deflate = |v: &mut Vec<f64>| {
        let mean: f64 = v.iter().sum::<f64>() * ones;
        v.iter_mut().for_each(|x| *x -= mean * ones);
    };
    let orthonormalize = |basis: &mut Vec<Vec<f64>>| {
        for i in 0..basis.len() {
            for j in 0..i {
                let dot: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                let (head, tail) = basis.split_at_mut(i);
                tail[0]
                    .iter_mut()
                    .zip(&head[j])
                    .for_each(|(a, b)| *a -= dot * b);
            }
            let norm: f64 = basis[i].iter().map(|x| x * x).sum::<f64>().sqrt();
            basis[i].iter_mut().for_each(|x| *x /= norm.max(1e-300));
        }
    };

    basis.iter_mut().for_each(&deflate);
    orthonormalize(&mut basis);

    let mut worst_residual = f64::INFINITY;
    for iter in 0..max_iters {
        // Power step with the shifted operator.
        let mut next: Vec<Vec<f64>> = basis
            .par_iter()
            .map(|v| {
                let mut lv = vec![0.0; m];
                graph.laplacian_apply(v, &mut lv);
                v.iter()
                    .zip(&lv)
                    .map(|(x, l)| shift * x - l)
                    .collect::<Vec<f64>>()
            })
            .collect();
        next.iter_mut().for_each(&deflate);
        orthonormalize(&mut next);
        basis = next;

        if iter % 10 != 9 && iter + 1 != max_iters {
            continue;
        }
        // Rayleigh-Ritz on the current block.
        let mut lb: Vec<Vec<f64>> = Vec::with_capacity(block);
        for v in &basis {
            let mut lv = vec![0.0; m];
            graph.laplacian_apply(v, &mut lv);
            lb.push(lv);
        }
        let mut t = DMatrix::<f64>::zeros(block, block);
        for i in 0..block {
            for j in 0..block {
                t[(i, j)] = basis[i].iter().zip(&lb[j]).map(|(a, b)| a * b).sum();
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        // Rotate, then check residuals of the wanted leading pairs.
        let rotated: Vec<Vec<f64>> = order
            .iter()
            .map(|&col| {
                (0..m)
                    .map(|row| {
                        (0..block)
                            .map(|b| basis[b][row] * eig.eigenvectors[(b, col)])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        worst_residual = 0.0f64;
        let mut kept = 0usize;
        for (slot, &col) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[col];
            if lambda <= tol {
                continue;
            }
            let v = &rotated[slot];
            let mut lv = vec![0.0; m];
            graph.laplacian_apply(v, &mut lv);
            let res: f64 = lv
                .iter()
                .zip(v)
                .map(|(l, x)| (l - lambda * x) * (l - lambda * x))
                .sum::<f64>()
                .sqrt();
            worst_residual = worst_residual.max(res / lambda.max(1.0));
            kept += 1;
            if kept == r_prime {
                break;
            }
        }
        if kept >= r_prime && worst_residual <= conv_tol {
            let mut values = Vec::with_capacity(r_prime);
            let mut functions = Vec::with_capacity(r_prime);
            for (slot, &col) in order.iter().enumerate() {
                let lambda = eig.eigenvalues[col];
                if lambda <= tol {
                    continue;
                }
                let mut f = rotated[slot].clone();
                canonicalize_sign(&mut f);
                values.push(lambda);
                functions.push(f);
                if values.len() == r_prime {
                    break;
                }
            }
            return Ok((values, functions, tol));
        }
        basis = rotated;
    }
    Err(Error::EigensolveFailed {
        iterations: max_iters,
        residual: worst_residual,
    })
}

/// Gradient of each interpolated eigenfunction at node `i`, one eigenfunction
/// per row (r' x n).
///
/// Row `j` is `(d_i - lambda_j)^{-1} sum_k (phi_k - phi_i) grad w_ik(x_i)`
/// with the Gaussian-kernel gradient `grad w_ik(x_i) = -(w_ik / sigma^2)
/// (x_i - x_k)`. Zero-distance neighbor pairs carry no well-defined kernel
/// direction and are skipped.
pub fn eigenfunction_gradient(
    model: &EigenmapsModel,
    points: &Matrix,
    node: usize,
) -> Result<Matrix> {
    let graph = &model.graph;
    let n = points.cols();
    let neighbors = &graph.neighbor_lists[node];
    if neighbors.is_empty() {
        return Err(Error::InsufficientNeighbors { needed: 1, got: 0 });
    }
    let d_i = graph.degrees[node];
    let xi = points.row(node);

    // Kernel gradients shared across eigenfunctions.
    let mut kernel_grads: Vec<Option<Vec<f64>>> = Vec::with_capacity(neighbors.len());
    for (slot, &k) in neighbors.iter().enumerate() {
        let xk = points.row(k);
        let diff: Vec<f64> = xi.iter().zip(xk).map(|(a, b)| a - b).collect();
        let dist_sq: f64 = diff.iter().map(|x| x * x).sum();
        if dist_sq == 0.0 {
            kernel_grads.push(None);
            continue;
        }
        let sigma = graph.local_scales[node][slot];
        let w = graph.weights[node][slot];
        let scale = -w / (sigma * sigma);
        kernel_grads.push(Some(diff.iter().map(|x| scale * x).collect()));
    }

    let mut out = Matrix::zeros(model.eigenvalues.len(), n);
    for (j, (lambda, phi)) in model
        .eigenvalues
        .iter()
        .zip(&model.eigenfunctions)
        .enumerate()
    {
        let denom = d_i - lambda;
        if denom.abs() <= 1e-12 * d_i.abs().max(lambda.abs()).max(1.0) {
            return Err(Error::SingularInterpolant {
                node,
                eigenfunction: j,
            });
        }
        let inv = 1.0 / denom;
        for (slot, &k) in neighbors.iter().enumerate() {
            let Some(grad) = &kernel_grads[slot] else {
                continue;
            };
            let dphi = phi[k] - phi[node];
            for (col, g) in grad.iter().enumerate() {
                let v = out.get(j, col) + inv * dphi * g;
                out.set(j, col, v);
            }
        }
    }
    Ok(out)
}

/// Tangent patches from the rank-r truncated SVD of the interpolated
/// eigenfunction gradients at every node.
///
/// Nodes whose singular-value ratio `sigma_r / sigma_1` falls below
/// `quality_min` (boundary points, where the eigenfunction derivatives
/// degenerate) are dropped; the second return value lists them. Nodes with
/// a singular interpolant are likewise dropped.
pub fn tangent_from_eigenmaps(
    model: &EigenmapsModel,
    points: &Matrix,
    r: usize,
    quality_min: f64,
) -> Result<(Vec<TangentPatch>, Vec<usize>)> {
    let r_prime = model.eigenvalues.len();
    if r > r_prime {
        return Err(Error::InvalidConfig {
            field: "r",
            message: format!("intrinsic dimension {r} exceeds the {r_prime} computed eigenfunctions"),
        });
    }
    let m = points.rows();
    let per_node: Vec<(usize, Option<TangentPatch>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let grad = match eigenfunction_gradient(model, points, i) {
                Ok(g) => g,
                Err(_) => return (i, None),
            };
            let svd = thin_svd(&grad.transpose());
            if svd.s.len() < r || svd.s[0] <= 0.0 {
                return (i, None);
            }
            let quality = svd.s[r - 1] / svd.s[0];
            if !quality.is_finite() || quality < quality_min {
                return (i, None);
            }
            let basis = Matrix::from_fn(points.cols(), r, |row, col| svd.u.get(row, col));
            (
                i,
                Some(TangentPatch {
                    base_point: points.row(i).to_vec(),
                    basis,
                    quality,
                }),
            )
        })
        .collect();

    let mut patches = Vec::new();
    let mut dropped = Vec::new();
    for (i, patch) in per_node {
        match patch {
            Some(p) => patches.push(p),
            None => dropped.push(i),
        }
    }
    if patches.is_empty() {
        return Err(Error::NoPatchesSurvived);
    }
    if !dropped.is_empty() {
        log::info!(
            "tangent_from_eigenmaps: dropped {} of {} nodes below quality {}",
            dropped.len(),
            m,
            quality_min
        );
    }
    Ok((patches, dropped))
}
