//! Householder reflectors with the unit-leading storage convention.

use crate::error::{Error, Result};

/// A Householder reflection `H = I - beta * v v^T` with `v(1) = 1`.
///
/// `beta = 0` encodes the identity (input already aligned with `+e1`) and
/// `beta = 2` with a zero tail encodes the pure sign flip (input aligned
/// with `-e1`). Both keep `H` an orthogonal involution.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderStep {
    pub v: Vec<f64>,
    pub beta: f64,
}

/// Compute the reflector mapping `x` onto `||x|| e1`.
///
/// Errors on an empty or non-finite input.
pub fn house(x: &[f64]) -> Result<HouseholderStep> {
    if x.is_empty() {
        return Err(Error::EmptyVector);
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "house input",
        });
    }
    let sigma: f64 = x[1..].iter().map(|v| v * v).sum();
    let mut v = x.to_vec();
    v[0] = 1.0;
    let beta;
    if sigma == 0.0 {
        // x is already a multiple of e1. A negative leading entry needs the
        // sign flip H = I - 2 e1 e1^T; beta = 2 keeps H orthogonal.
        beta = if x[0] >= 0.0 { 0.0 } else { 2.0 };
    } else {
        let mu = (x[0] * x[0] + sigma).sqrt();
        let v0 = if x[0] <= 0.0 {
            x[0] - mu
        } else {
            // Cancellation-free form of x(1) - mu for positive x(1).
            -sigma / (x[0] + mu)
        };
        beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
        v[0] = v0;
        let inv = 1.0 / v0;
        for t in v.iter_mut() {
            *t *= inv;
        }
        v[0] = 1.0;
    }
    Ok(HouseholderStep { v, beta })
}

impl HouseholderStep {
    /// Apply `I - beta v v^T` to a vector in place.
    pub fn apply(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.v.len());
        if self.beta == 0.0 {
            return;
        }
        let w: f64 = self.v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        let bw = self.beta * w;
        for (xi, vi) in x.iter_mut().zip(&self.v) {
            *xi -= bw * vi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn aligned_with_e1_is_identity() {
        let h = house(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(h.beta, 0.0);
        assert_eq!(h.v, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn negative_scalar_flips_sign() {
        // The zero-tail branch must still produce an orthogonal reflection,
        // so the flip is I - 2 v v^T with v = e1.
        let h = house(&[-2.0]).unwrap();
        assert_eq!(h.v, vec![1.0]);
        assert_eq!(h.beta, 2.0);
        let mut x = [-2.0];
        h.apply(&mut x);
        assert!((x[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn three_four_maps_to_five_zero() {
        let h = house(&[3.0, 4.0]).unwrap();
        let mut x = [3.0, 4.0];
        h.apply(&mut x);
        assert!((x[0] - 5.0).abs() <= 1e-12);
        assert!(x[1].abs() <= 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(house(&[]).is_err());
    }

    #[test]
    fn reflector_property_random() {
        // Generic branch: (I - beta v v^T) x = ||x|| e1 to 1e-12 * ||x||.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rng = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for len in 1..=8 {
            for _ in 0..50 {
                let x: Vec<f64> = (0..len).map(|_| rng()).collect();
                let n = norm(&x);
                if n == 0.0 {
                    continue;
                }
                let h = house(&x).unwrap();
                assert!(h.v[0] == 1.0);
                assert!((0.0..=2.0).contains(&h.beta), "beta = {}", h.beta);
                let mut y = x.clone();
                h.apply(&mut y);
                assert!((y[0] - n).abs() <= 1e-12 * n, "head: {} vs {}", y[0], n);
                for &t in &y[1..] {
                    assert!(t.abs() <= 1e-12 * n);
                }
                // Involution: applying twice restores x.
                h.apply(&mut y);
                for (a, b) in y.iter().zip(&x) {
                    assert!((a - b).abs() <= 1e-12 * n.max(1.0));
                }
            }
        }
    }
}
