//! Column-pivoted Householder QR in compact overwritten form.
//!
//! The factor matrix is overwritten in place: pivot column `l` carries the
//! triangular entries in rows `0..=l` and the reflector tail in the rows
//! below, so a full `Q`/`R` pair can be rebuilt on demand.

use crate::error::{Error, Result};
use crate::linalg::householder::{house, HouseholderStep};
use crate::matrix::Matrix;

/// Compact column-pivoted QR factorization of an `r x n` matrix.
#[derive(Debug, Clone)]
pub struct CompactPqr {
    /// Overwritten factor: R entries on and above the per-pivot diagonal,
    /// reflector tails below it.
    pub a: Matrix,
    /// Pivot columns in selection order.
    pub pivots: Vec<usize>,
    /// Unselected columns, ascending.
    pub complement: Vec<usize>,
    /// Number of completed stages, `<= min(r, n)`.
    pub stage_count: usize,
    /// Reflection coefficient per stage. Stored because an all-zero tail is
    /// ambiguous between the identity (beta = 0) and the sign flip
    /// (beta = 2), so beta cannot always be rebuilt from `a`.
    pub betas: Vec<f64>,
}

/// Working state of one pivoted QR factorization.
///
/// Shared by the single-matrix path and the multi-patch path so that a
/// one-patch simultaneous run reproduces the plain factorization bit for bit.
#[derive(Debug, Clone)]
pub(crate) struct FactorState {
    a: Matrix,
    /// Residual squared column magnitudes; zeroed once a column is pivoted.
    c: Vec<f64>,
    /// Columns not yet pivoted on this factorization.
    remaining: Vec<bool>,
    pivots: Vec<usize>,
    betas: Vec<f64>,
    /// Period of the from-scratch residual refresh, `ceil(rows / 2)`. The
    /// running downdate `c(j) -= A(i,j)^2` cancels catastrophically for tiny
    /// residuals, so magnitudes are re-evaluated on this schedule.
    recompute_period: usize,
}

impl FactorState {
    pub(crate) fn new(a: Matrix) -> Self {
        let rows = a.rows();
        let cols = a.cols();
        let c = (0..cols).map(|j| a.col_tail_norm_sq(j, 0)).collect();
        Self {
            a,
            c,
            remaining: vec![true; cols],
            pivots: Vec::new(),
            betas: Vec::new(),
            recompute_period: rows.div_ceil(2).max(1),
        }
    }

    #[inline]
    pub(crate) fn rows(&self) -> usize {
        self.a.rows()
    }

    #[inline]
    pub(crate) fn stage(&self) -> usize {
        self.pivots.len()
    }

    /// True while further pivots can still be absorbed.
    #[inline]
    pub(crate) fn active(&self) -> bool {
        self.stage() < self.rows()
    }

    #[inline]
    pub(crate) fn residuals(&self) -> &[f64] {
        &self.c
    }

    #[inline]
    pub(crate) fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Largest residual among remaining columns together with its index
    /// (lowest index wins ties). `None` when everything is pivoted.
    pub(crate) fn max_residual(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.a.cols() {
            if !self.remaining[j] {
                continue;
            }
            match best {
                Some((_, c)) if self.c[j] <= c => {}
                _ => best = Some((j, self.c[j])),
            }
        }
        best
    }

    /// Run one Householder stage pivoting on column `j`.
    pub(crate) fn apply_pivot(&mut self, j: usize) {
        debug_assert!(self.active());
        debug_assert!(self.remaining[j]);
        let i = self.stage();
        let rows = self.rows();
        let cols = self.a.cols();

        let tail: Vec<f64> = (i..rows).map(|t| self.a.get(t, j)).collect();
        let step = house(&tail).expect("pivot column tail is non-empty and finite");

        // Reflect every remaining column, the pivot included; its
        // below-diagonal entries become zero and are reused for the tail.
        if step.beta != 0.0 {
            for jj in 0..cols {
                if !self.remaining[jj] {
                    continue;
                }
                self.apply_step_to_col(&step, i, jj);
            }
        }
        for (t, &vt) in step.v.iter().enumerate().skip(1) {
            self.a.set(i + t, j, vt);
        }

        // Residual downdate over the remaining columns; the pivot column's
        // own magnitude cancels to ~0 and is then pinned exactly.
        for jj in 0..cols {
            if self.remaining[jj] {
                let d = self.a.get(i, jj);
                self.c[jj] -= d * d;
            }
        }
        self.c[j] = 0.0;
        self.remaining[j] = false;
        self.pivots.push(j);
        self.betas.push(step.beta);

        if !self.active() {
            for jj in 0..cols {
                self.c[jj] = 0.0;
            }
        } else if self.stage() % self.recompute_period == 0 {
            let from = self.stage();
            for jj in 0..cols {
                if self.remaining[jj] {
                    self.c[jj] = self.a.col_tail_norm_sq(jj, from);
                }
            }
        }
    }

    fn apply_step_to_col(&mut self, step: &HouseholderStep, row_from: usize, j: usize) {
        let mut w = 0.0;
        for (t, vt) in step.v.iter().enumerate() {
            w += vt * self.a.get(row_from + t, j);
        }
        let bw = step.beta * w;
        if bw == 0.0 {
            return;
        }
        for (t, vt) in step.v.iter().enumerate() {
            let val = self.a.get(row_from + t, j) - bw * vt;
            self.a.set(row_from + t, j, val);
        }
    }

    pub(crate) fn into_compact(self) -> CompactPqr {
        let cols = self.a.cols();
        let complement = (0..cols).filter(|j| self.remaining[*j]).collect();
        CompactPqr {
            a: self.a,
            stage_count: self.pivots.len(),
            pivots: self.pivots,
            complement,
            betas: self.betas,
        }
    }
}

/// Businger-Golub pivoted QR of `a`, stopping once every residual column
/// norm satisfies `sqrt(c(j)) <= eps`.
///
/// Ties in the pivot choice go to the lowest column index, which makes the
/// factorization a pure function of its inputs.
pub fn pqr(a: &Matrix, eps: f64) -> Result<CompactPqr> {
    if !a.is_finite() {
        return Err(Error::NonFinite { context: "pqr input" });
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidConfig {
            field: "eps",
            message: format!("must be >= 0, got {eps}"),
        });
    }
    let threshold = eps * eps;
    let mut state = FactorState::new(a.clone());
    while state.active() {
        match state.max_residual() {
            Some((j, c)) if c > threshold => state.apply_pivot(j),
            _ => break,
        }
    }
    Ok(state.into_compact())
}

/// Rebuild the orthogonal factor and the column-permuted triangular factor.
///
/// Returns `(q, r_mat)` with `q` of size `r x r` and `r_mat` of size `r x n`
/// whose columns follow the permutation `[pivots | complement]`, so that
/// `q * r_mat` equals the pivot-permuted input.
pub fn reconstruct_qr(f: &CompactPqr) -> (Matrix, Matrix) {
    let rows = f.a.rows();
    let n = f.a.cols();

    let mut q = Matrix::identity(rows);
    for (stage, (&piv, &beta)) in f.pivots.iter().zip(&f.betas).enumerate() {
        if beta == 0.0 {
            continue;
        }
        let mut v = vec![0.0; rows - stage];
        v[0] = 1.0;
        for t in 1..rows - stage {
            v[t] = f.a.get(stage + t, piv);
        }
        // Right-multiply: q <- q * H_stage with H embedded at offset `stage`.
        for i in 0..rows {
            let mut w = 0.0;
            for (t, vt) in v.iter().enumerate() {
                w += q.get(i, stage + t) * vt;
            }
            let bw = beta * w;
            if bw == 0.0 {
                continue;
            }
            for (t, vt) in v.iter().enumerate() {
                let val = q.get(i, stage + t) - bw * vt;
                q.set(i, stage + t, val);
            }
        }
    }

    let mut r_mat = Matrix::zeros(rows, n);
    for (l, &piv) in f.pivots.iter().enumerate() {
        for i in 0..=l.min(rows - 1) {
            r_mat.set(i, l, f.a.get(i, piv));
        }
    }
    for (offset, &j) in f.complement.iter().enumerate() {
        let l = f.pivots.len() + offset;
        for i in 0..rows {
            r_mat.set(i, l, f.a.get(i, j));
        }
    }
    (q, r_mat)
}

/// Column permutation `[pivots | complement]` applied to `m`.
pub fn permute_columns(m: &Matrix, f: &CompactPqr) -> Matrix {
    let order: Vec<usize> = f.pivots.iter().chain(&f.complement).copied().collect();
    Matrix::from_fn(m.rows(), m.cols(), |i, l| m.get(i, order[l]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frob_diff(a: &Matrix, b: &Matrix) -> f64 {
        let mut s = 0.0;
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                s += (a.get(i, j) - b.get(i, j)).powi(2);
            }
        }
        s.sqrt()
    }

    fn rand_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
        Matrix::from_fn(rows, cols, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
    }

    #[test]
    fn identity_ties_break_by_index() {
        let f = pqr(&Matrix::identity(2), 0.0).unwrap();
        assert_eq!(f.pivots, vec![0, 1]);
        assert_eq!(f.stage_count, 2);
    }

    #[test]
    fn distinct_norms_pick_largest_first() {
        let a = Matrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let f = pqr(&a, 0.0).unwrap();
        assert_eq!(f.pivots, vec![0, 1]);
        assert_eq!(f.stage_count, 2);
        assert_eq!(f.complement, vec![2]);
    }

    #[test]
    fn single_row_matrix() {
        let a = Matrix::from_rows(&[vec![0.0, 3.0, 0.0]]).unwrap();
        let f = pqr(&a, 0.0).unwrap();
        assert_eq!(f.pivots, vec![1]);
        let (q, r) = reconstruct_qr(&f);
        assert_eq!(q.rows(), 1);
        assert!((q.get(0, 0) - 1.0).abs() < 1e-15);
        assert_eq!(r.row(0), &[3.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_reconstructs_to_identity() {
        let f = pqr(&Matrix::identity(3), 0.0).unwrap();
        let (q, r) = reconstruct_qr(&f);
        assert!(frob_diff(&q, &Matrix::identity(3)) < 1e-14);
        assert!(frob_diff(&r, &Matrix::identity(3)) < 1e-14);
    }

    #[test]
    fn reconstruction_matches_permuted_input() {
        for seed in 1..20u64 {
            let a = rand_matrix(3, 5, seed);
            let f = pqr(&a, 0.0).unwrap();
            let (q, r) = reconstruct_qr(&f);
            let permuted = permute_columns(&a, &f);
            let qr = q.matmul(&r);
            assert!(
                frob_diff(&qr, &permuted) <= 1e-10 * permuted.frobenius_norm().max(1.0),
                "seed {seed}"
            );
            // Orthogonality of q.
            let qtq = q.transpose().matmul(&q);
            assert!(frob_diff(&qtq, &Matrix::identity(3)) <= 1e-10);
            // Businger-Golub monotone diagonal.
            for i in 1..f.stage_count {
                assert!(r.get(i - 1, i - 1).abs() >= r.get(i, i).abs() - 1e-12);
            }
        }
    }

    #[test]
    fn negative_aligned_column_stays_exact() {
        // Exercises the sign-flip reflector inside a factorization.
        let a = Matrix::from_rows(&[vec![-3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let f = pqr(&a, 0.0).unwrap();
        let (q, r) = reconstruct_qr(&f);
        let qr = q.matmul(&r);
        let permuted = permute_columns(&a, &f);
        assert!(frob_diff(&qr, &permuted) < 1e-12);
        assert!((r.get(0, 0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eps_prunes_stages_early() {
        // Rank-1 up to tiny noise: a large eps stops after one stage.
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-13]]).unwrap();
        let f = pqr(&a, 1e-6).unwrap();
        assert_eq!(f.stage_count, 1);
        assert_eq!(f.complement.len(), 1);
    }

    #[test]
    fn non_finite_rejected() {
        let a = Matrix::from_raw(1, 2, vec![f64::INFINITY, 0.0]);
        assert!(pqr(&a, 0.0).is_err());
    }
}
