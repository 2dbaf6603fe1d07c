//! Synthetic sampled manifolds with analytic tangent bases.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::simpqr::PatchSet;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Points sampled on a manifold, with the generating parameters and,
/// when available, orthonormal analytic tangent bases.
#[derive(Debug, Clone)]
pub struct ManifoldSample {
    /// One point per row (m x n).
    pub points: Matrix,
    /// Orthonormal n x r tangent basis per point.
    pub analytic_tangents: Option<Vec<Matrix>>,
    /// Generating parameters, one row per point.
    pub params: Matrix,
    pub seed: u64,
}

impl ManifoldSample {
    pub fn point_count(&self) -> usize {
        self.points.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.cols()
    }

    /// Patch set built from the analytic tangents, base points included.
    pub fn analytic_patch_set(&self) -> Result<PatchSet> {
        let tangents = self.analytic_tangents.clone().ok_or(Error::InvalidConfig {
            field: "analytic_tangents",
            message: "sample carries no analytic tangents".into(),
        })?;
        PatchSet::new(tangents, Some(self.points.clone()))
    }
}

/// Modified Gram-Schmidt orthonormalization of Jacobian columns.
fn orthonormalize(cols: &[Vec<f64>]) -> Matrix {
    let n = cols[0].len();
    let mut qs: Vec<Vec<f64>> = Vec::new();
    for col in cols {
        let mut v = col.clone();
        for q in &qs {
            let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm > 0.0, "degenerate Jacobian column");
        v.iter_mut().for_each(|x| *x /= norm);
        qs.push(v);
    }
    Matrix::from_fn(n, qs.len(), |i, j| qs[j][i])
}

fn build_sample(
    m: usize,
    seed: u64,
    param_ranges: [(f64, f64); 2],
    map: impl Fn(f64, f64) -> (Vec<f64>, [Vec<f64>; 2]),
) -> ManifoldSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut params: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut tangents: Vec<Matrix> = Vec::with_capacity(m);
    for _ in 0..m {
        let a = rng.gen_range(param_ranges[0].0..=param_ranges[0].1);
        let b = rng.gen_range(param_ranges[1].0..=param_ranges[1].1);
        let (point, jac) = map(a, b);
        tangents.push(orthonormalize(&jac));
        points.push(point);
        params.push(vec![a, b]);
    }
    ManifoldSample {
        points: Matrix::from_rows(&points).expect("finite generator output"),
        analytic_tangents: Some(tangents),
        params: Matrix::from_rows(&params).expect("finite parameters"),
        seed,
    }
}

/// 2-dimensional surface in R^10 driven by the first and last coordinates,
/// with the two product-of-sines coordinates scaled by 2 so that plain POD
/// aligns with them instead.
///
/// Sampling is uniform over `[-1,1] x [-1,1]`.
pub fn gen_surface10(m: usize, seed: u64) -> Result<ManifoldSample> {
    if m < 10 {
        return Err(Error::InvalidConfig {
            field: "m",
            message: format!("need at least 10 samples, got {m}"),
        });
    }
    Ok(build_sample(m, seed, [(-1.0, 1.0), (-1.0, 1.0)], |a, b| {
        let (sa, ca) = (PI * a).sin_cos();
        let (sb, cb) = (PI * b).sin_cos();
        let point = vec![
            a,
            sa,
            ca,
            sb,
            cb,
            2.0 * sa * sb,
            sa * cb,
            2.0 * ca * sb,
            ca * cb,
            b,
        ];
        let da = vec![
            1.0,
            PI * ca,
            -PI * sa,
            0.0,
            0.0,
            2.0 * PI * ca * sb,
            PI * ca * cb,
            -2.0 * PI * sa * sb,
            -PI * sa * cb,
            0.0,
        ];
        let db = vec![
            0.0,
            0.0,
            0.0,
            PI * cb,
            -PI * sb,
            2.0 * PI * sa * cb,
            -PI * sa * sb,
            2.0 * PI * ca * cb,
            -PI * ca * sb,
            1.0,
        ];
        (point, [da, db])
    }))
}

/// Unit cylinder in R^3: `(cos t, sin t, h)` over `[0, 2pi] x [-1, 1]`.
pub fn gen_cylinder(m: usize, seed: u64) -> Result<ManifoldSample> {
    if m == 0 {
        return Err(Error::InvalidConfig {
            field: "m",
            message: "need at least one sample".into(),
        });
    }
    Ok(build_sample(m, seed, [(0.0, 2.0 * PI), (-1.0, 1.0)], |t, h| {
        let (s, c) = t.sin_cos();
        (vec![c, s, h], [vec![-s, c, 0.0], vec![0.0, 0.0, 1.0]])
    }))
}

/// Spiral surface in R^3: `(r cos t, r sin t, t / 2pi)` over
/// `[0.2, 1] x [-pi, pi]`. Its tangent planes always project one-to-one
/// onto the first two coordinates, but the sheet ends at the angular seam
/// overlap in that projection.
pub fn gen_spiral(m: usize, seed: u64) -> Result<ManifoldSample> {
    if m == 0 {
        return Err(Error::InvalidConfig {
            field: "m",
            message: "need at least one sample".into(),
        });
    }
    Ok(build_sample(m, seed, [(0.2, 1.0), (-PI, PI)], |r, t| {
        let (s, c) = t.sin_cos();
        (
            vec![r * c, r * s, t / (2.0 * PI)],
            [vec![c, s, 0.0], vec![-r * s, r * c, 1.0 / (2.0 * PI)]],
        )
    }))
}
