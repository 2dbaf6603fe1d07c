//! Matrix volume by exhaustive minor enumeration.
//!
//! The volume of a p x q matrix is the largest absolute determinant over its
//! min(p, q)-sized square sub-matrices. Enumeration visits C(max(p,q), min(p,q))
//! minors, so this is strictly a verification oracle for small sizes and is
//! gated behind an explicit budget.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_VOLUME_BUDGET: u128 = 2_000_000;

pub fn volume(m: &Matrix) -> Result<f64> {
    volume_with_budget(m, DEFAULT_VOLUME_BUDGET)
}

pub fn volume_with_budget(m: &Matrix, budget: u128) -> Result<f64> {
    let (p, q) = (m.rows(), m.cols());
    let s = p.min(q);
    if s == 0 {
        // Empty square sub-matrix: determinant of nothing is 1.
        return Ok(1.0);
    }
    // Enumerate subsets of the larger dimension.
    let wide = q >= p;
    let big = p.max(q);
    let count = binomial(big, s);
    if count > budget {
        return Err(Error::VolumeBudget {
            needed: count,
            budget,
        });
    }

    let mut idx: Vec<usize> = (0..s).collect();
    let mut best = 0.0f64;
    loop {
        let sub = if wide {
            Matrix::from_fn(s, s, |i, j| m.get(i, idx[j]))
        } else {
            Matrix::from_fn(s, s, |i, j| m.get(idx[i], j))
        };
        best = best.max(det(&sub).abs());
        if !next_combination(&mut idx, big) {
            break;
        }
    }
    Ok(best)
}

/// Determinant by LU with partial pivoting; intended for small matrices.
pub(crate) fn det(m: &Matrix) -> f64 {
    let n = m.rows();
    debug_assert_eq!(n, m.cols());
    let mut a: Vec<f64> = m.as_slice().to_vec();
    let mut sign = 1.0;
    let mut d = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a[i * n + k].abs() > a[piv * n + k].abs() {
                piv = i;
            }
        }
        if a[piv * n + k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            sign = -sign;
        }
        d *= a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / a[k * n + k];
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
        }
    }
    sign * d
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u128::MAX / 2 {
            return u128::MAX;
        }
    }
    acc
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] != i + n - k {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
