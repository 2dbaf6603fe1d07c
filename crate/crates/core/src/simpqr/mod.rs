//! Simultaneously pivoted Householder QR over a collection of patches.
//!
//! Given orthonormal tangent bases `U_1..U_K` (n x r), the factorization
//! selects one pivot coordinate per stage together with the subset of
//! patches on which that coordinate is used for a Householder reflection.
//! The per-stage objective trades the fraction of patches served against
//! the smallest normalized pivot magnitude; `gamma` sets the trade-off.
//! Every patch ends up with its own local pivoted QR factorization whose
//! pivot columns all come from the shared coordinate pool.
//!
//! The stage loop is sequential; within a stage the per-patch reflections
//! are independent and are applied in parallel for large patch subsets.
//! Outputs do not depend on thread scheduling.

mod gamma;
mod guarantees;
mod select;

pub use gamma::{gamma_path, gamma_path_with_budget, GammaSegment, DEFAULT_PATH_BUDGET};
pub use guarantees::{check_guarantees, GuaranteeReport, PatchViolation, StageViolation};
pub use select::{select_pivot, Selection};

use crate::error::{Error, Result};
use crate::linalg::{CompactPqr, FactorState};
use crate::matrix::Matrix;
use rayon::prelude::*;
use serde::Serialize;

/// Orthonormal tangent bases `U_k` (n x r) with optional base points.
#[derive(Debug, Clone)]
pub struct PatchSet {
    n: usize,
    r: usize,
    bases: Vec<Matrix>,
    base_points: Option<Matrix>,
}

pub const ORTHONORMALITY_TOL: f64 = 1e-8;

impl PatchSet {
    /// Validates that all bases share the same shape and have orthonormal
    /// columns to within `1e-8` in Frobenius norm.
    pub fn new(bases: Vec<Matrix>, base_points: Option<Matrix>) -> Result<Self> {
        let first = bases.first().ok_or(Error::InvalidConfig {
            field: "bases",
            message: "need at least one patch".into(),
        })?;
        let (n, r) = (first.rows(), first.cols());
        for (k, u) in bases.iter().enumerate() {
            if u.rows() != n || u.cols() != r {
                return Err(Error::DimensionMismatch {
                    context: "patch basis shape",
                    expected: n * r,
                    got: u.rows() * u.cols(),
                });
            }
            let gram = u.transpose().matmul(u);
            let mut dev = 0.0;
            for i in 0..r {
                for j in 0..r {
                    let target = if i == j { 1.0 } else { 0.0 };
                    dev += (gram.get(i, j) - target).powi(2);
                }
            }
            if dev.sqrt() > ORTHONORMALITY_TOL {
                return Err(Error::InvalidConfig {
                    field: "bases",
                    message: format!(
                        "patch {k} is not orthonormal: deviation {:.3e}",
                        dev.sqrt()
                    ),
                });
            }
        }
        if let Some(bp) = &base_points {
            if bp.rows() != bases.len() || bp.cols() != n {
                return Err(Error::DimensionMismatch {
                    context: "base points shape",
                    expected: bases.len() * n,
                    got: bp.rows() * bp.cols(),
                });
            }
        }
        Ok(Self {
            n,
            r,
            bases,
            base_points,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.r
    }

    pub fn patch_count(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[Matrix] {
        &self.bases
    }

    pub fn base_points(&self) -> Option<&Matrix> {
        self.base_points.as_ref()
    }
}

/// Trade-off parameter and residual tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimPqrConfig {
    /// Positive trade-off between patch sharing (small) and per-patch
    /// pivot magnitude (large).
    pub gamma: f64,
    /// Residual tolerance: coordinate `j` stays available for pivoting on
    /// patch `k` while the squared residual magnitude satisfies
    /// `c_k(j) > eps`. Note this bounds the *squared* magnitude, unlike
    /// [`crate::linalg::pqr`] whose `eps` bounds `sqrt(c)`.
    pub eps: f64,
}

impl SimPqrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidConfig {
                field: "gamma",
                message: format!("must be a positive finite number, got {}", self.gamma),
            });
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidConfig {
                field: "eps",
                message: format!("must be >= 0, got {}", self.eps),
            });
        }
        Ok(())
    }
}

/// Per-stage log entry.
#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    /// Stage number, starting at 1.
    pub stage: usize,
    /// Selected coordinate.
    pub j_star: usize,
    /// Selected patches in descending order of normalized magnitude.
    pub s_star: Vec<usize>,
    /// Objective value attained.
    pub objective: f64,
    /// Largest patch count any coordinate could have served this stage.
    pub s_max: usize,
    /// Normalized magnitudes sqrt(c_k(j*) / C_k) aligned with `s_star`.
    pub thetas: Vec<f64>,
}

impl StageRecord {
    /// The gamma-independent part of the record, used to compare stage
    /// sequences across runs at different parameter values.
    pub fn signature(&self) -> (usize, &[usize], usize) {
        (self.j_star, &self.s_star, self.s_max)
    }
}

/// Closest parameter values below and above the one used that change the
/// selected stage sequence. Either end may be infinite.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaNeighbors {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
}

/// Output of a simultaneous factorization.
#[derive(Debug, Clone)]
pub struct SimPqrResult {
    /// Union of the per-patch pivot lists, ordered by first selection.
    pub pivots: Vec<usize>,
    /// Coordinates unselected on every patch, ascending.
    pub complement: Vec<usize>,
    /// Pivot list of each patch, in its local selection order.
    pub patch_pivots: Vec<Vec<usize>>,
    /// Compact factorization of each patch.
    pub compact_factors: Vec<CompactPqr>,
    /// Stage log.
    pub stages: Vec<StageRecord>,
    /// Product of pivot magnitudes per patch; lower bound on the volume of
    /// the sampled sub-basis.
    pub patch_volumes: Vec<f64>,
    /// Parameter interval around `gamma` with an identical stage sequence.
    pub gamma_neighbors: GammaNeighbors,
    /// Patches left partially factored (only with `allow_partial`).
    pub partial_patches: Vec<usize>,
    /// Ambient dimension.
    pub n: usize,
}

impl SimPqrResult {
    pub fn stage_signatures(&self) -> Vec<(usize, &[usize], usize)> {
        self.stages.iter().map(StageRecord::signature).collect()
    }

    /// Sorted copy of the global pivot set.
    pub fn pivot_set(&self) -> Vec<usize> {
        let mut p = self.pivots.clone();
        p.sort_unstable();
        p
    }
}

/// Behavior switches for the factorization.
#[derive(Debug, Clone, Default)]
pub struct SimPqrOptions {
    /// Record rank-deficient patches as partial instead of failing.
    pub allow_partial: bool,
    /// Coordinates never offered as pivots (they still participate in the
    /// reflections). Used to restrict branch pivots to the complement of
    /// the immersion coordinates.
    pub excluded_coords: Vec<usize>,
}

/// Simultaneously pivoted QR over the patch set.
pub fn simpqr(patches: &PatchSet, cfg: &SimPqrConfig) -> Result<SimPqrResult> {
    simpqr_with_options(patches, cfg, &SimPqrOptions::default())
}

pub fn simpqr_with_options(
    patches: &PatchSet,
    cfg: &SimPqrConfig,
    opts: &SimPqrOptions,
) -> Result<SimPqrResult> {
    let transposed: Vec<Matrix> = patches.bases().iter().map(Matrix::transpose).collect();
    simpqr_engine(transposed, cfg, opts)
}

/// Closest parameter neighbors for the given configuration. Computed during
/// the same factorization pass, at no extra asymptotic cost.
pub fn gamma_neighbors(patches: &PatchSet, cfg: &SimPqrConfig) -> Result<GammaNeighbors> {
    Ok(simpqr(patches, cfg)?.gamma_neighbors)
}

/// Threshold below which per-patch reflections stay on one thread.
const PARALLEL_PATCH_THRESHOLD: usize = 64;

/// Core loop over pre-transposed patch matrices `A_k = U_k^T` (r_k x n).
/// Patches may have different row counts, which the branch-coordinate pass
/// relies on.
pub(crate) fn simpqr_engine(
    transposed: Vec<Matrix>,
    cfg: &SimPqrConfig,
    opts: &SimPqrOptions,
) -> Result<SimPqrResult> {
    cfg.validate()?;
    let patch_count = transposed.len();
    let n = transposed
        .first()
        .map(Matrix::cols)
        .ok_or(Error::InvalidConfig {
            field: "bases",
            message: "need at least one patch".into(),
        })?;
    for t in &transposed {
        if t.cols() != n {
            return Err(Error::DimensionMismatch {
                context: "patch ambient dimension",
                expected: n,
                got: t.cols(),
            });
        }
    }
    for &j in &opts.excluded_coords {
        if j >= n {
            return Err(Error::InvalidConfig {
                field: "excluded_coords",
                message: format!("coordinate {j} out of range for ambient dimension {n}"),
            });
        }
    }

    let mut states: Vec<FactorState> = transposed.into_iter().map(FactorState::new).collect();
    let mut allowed = vec![true; n];
    for &j in &opts.excluded_coords {
        allowed[j] = false;
    }
    // eligible[k][j]: j not yet pivoted on k, j allowed, patch k active.
    let mut eligible: Vec<Vec<bool>> = states
        .iter()
        .map(|st| {
            (0..n)
                .map(|j| allowed[j] && st.active())
                .collect::<Vec<bool>>()
        })
        .collect();

    let mut volumes = vec![1.0f64; patch_count];
    let mut stage_log: Vec<StageRecord> = Vec::new();
    let mut gamma_minus = f64::NEG_INFINITY;
    let mut gamma_plus = f64::INFINITY;
    let max_stages: usize = states.iter().map(FactorState::rows).sum();

    loop {
        let c_view: Vec<&[f64]> = states.iter().map(FactorState::residuals).collect();
        let e_view: Vec<&[bool]> = eligible.iter().map(Vec::as_slice).collect();
        let Some(sel) = select::select_pivot_impl(&c_view, &e_view, cfg.gamma, cfg.eps) else {
            break;
        };

        for &k in &sel.s_star {
            volumes[k] *= states[k].residuals()[sel.j_star].sqrt();
        }

        let mut chosen = vec![false; patch_count];
        for &k in &sel.s_star {
            chosen[k] = true;
        }
        if sel.s_star.len() >= PARALLEL_PATCH_THRESHOLD {
            states
                .par_iter_mut()
                .enumerate()
                .filter(|(k, _)| chosen[*k])
                .for_each(|(_, st)| st.apply_pivot(sel.j_star));
        } else {
            for &k in &sel.s_star {
                states[k].apply_pivot(sel.j_star);
            }
        }
        for &k in &sel.s_star {
            if states[k].active() {
                eligible[k][sel.j_star] = false;
            } else {
                eligible[k].iter_mut().for_each(|e| *e = false);
            }
        }

        gamma_minus = gamma_minus.max(sel.gamma_lower);
        gamma_plus = gamma_plus.min(sel.gamma_upper);
        stage_log.push(StageRecord {
            stage: stage_log.len() + 1,
            j_star: sel.j_star,
            s_star: sel.s_star,
            objective: sel.objective,
            s_max: sel.s_max,
            thetas: sel.thetas,
        });
        debug_assert!(stage_log.len() <= max_stages);
    }

    let mut partial = Vec::new();
    for (k, st) in states.iter().enumerate() {
        if st.active() {
            if !opts.allow_partial {
                return Err(Error::PatchRankDeficient {
                    patch: k,
                    completed: st.stage(),
                    rank: st.rows(),
                });
            }
            partial.push(k);
        }
    }

    let mut pivots = Vec::new();
    let mut seen = vec![false; n];
    for rec in &stage_log {
        if !seen[rec.j_star] {
            seen[rec.j_star] = true;
            pivots.push(rec.j_star);
        }
    }
    let complement = (0..n).filter(|&j| !seen[j]).collect();
    let patch_pivots = states.iter().map(|st| st.pivots().to_vec()).collect();
    let compact_factors = states.into_iter().map(FactorState::into_compact).collect();

    Ok(SimPqrResult {
        pivots,
        complement,
        patch_pivots,
        compact_factors,
        stages: stage_log,
        patch_volumes: volumes,
        gamma_neighbors: GammaNeighbors {
            gamma_minus,
            gamma_plus,
        },
        partial_patches: partial,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pqr;

    fn orthonormalize(cols: Vec<Vec<f64>>) -> Matrix {
        // Modified Gram-Schmidt over the given columns.
        let n = cols[0].len();
        let mut qs: Vec<Vec<f64>> = Vec::new();
        for col in cols {
            let mut v = col;
            for q in &qs {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            qs.push(v);
        }
        Matrix::from_fn(n, qs.len(), |i, j| qs[j][i])
    }

    fn random_patch(n: usize, r: usize, seed: u64) -> Matrix {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
        let mut rng = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let cols = (0..r).map(|_| (0..n).map(|_| rng()).collect()).collect();
        orthonormalize(cols)
    }

    #[test]
    fn single_patch_matches_plain_pqr() {
        for seed in 1..12u64 {
            let u = random_patch(7, 3, seed);
            let patches = PatchSet::new(vec![u.clone()], None).unwrap();
            let eps = 1e-8;
            let res = simpqr(
                &patches,
                &SimPqrConfig {
                    gamma: 0.5,
                    eps: eps * eps,
                },
            )
            .unwrap();
            let plain = pqr(&u.transpose(), eps).unwrap();
            assert_eq!(res.patch_pivots[0], plain.pivots, "seed {seed}");
            assert_eq!(res.compact_factors[0].stage_count, plain.stage_count);
            assert_eq!(
                res.compact_factors[0].a.as_slice(),
                plain.a.as_slice(),
                "seed {seed}: compact factors must agree bit for bit"
            );
            assert_eq!(res.gamma_neighbors.gamma_minus, f64::NEG_INFINITY);
            assert_eq!(res.gamma_neighbors.gamma_plus, f64::INFINITY);
        }
    }

    #[test]
    fn union_and_intersection_identities() {
        let patches = PatchSet::new(
            (0..6).map(|s| random_patch(9, 2, 100 + s)).collect(),
            None,
        )
        .unwrap();
        let res = simpqr(
            &patches,
            &SimPqrConfig {
                gamma: 1.0 / 6.0,
                eps: 1e-12,
            },
        )
        .unwrap();
        let mut union: Vec<usize> = res.patch_pivots.iter().flatten().copied().collect();
        union.sort_unstable();
        union.dedup();
        assert_eq!(res.pivot_set(), union);
        for j in &res.complement {
            for pp in &res.patch_pivots {
                assert!(!pp.contains(j));
            }
        }
        assert_eq!(res.pivots.len() + res.complement.len(), 9);
    }

    #[test]
    fn patch_volume_tracks_diagonal_product() {
        let patches = PatchSet::new(
            (0..4).map(|s| random_patch(6, 3, 200 + s)).collect(),
            None,
        )
        .unwrap();
        let res = simpqr(
            &patches,
            &SimPqrConfig {
                gamma: 0.25,
                eps: 1e-12,
            },
        )
        .unwrap();
        for (k, factor) in res.compact_factors.iter().enumerate() {
            let (_, r_mat) = crate::linalg::reconstruct_qr(factor);
            let mut prod = 1.0;
            for i in 0..factor.stage_count {
                prod *= r_mat.get(i, i).abs();
            }
            assert!(
                (prod - res.patch_volumes[k]).abs() <= 1e-10 * prod.max(1.0),
                "patch {k}: {} vs {}",
                prod,
                res.patch_volumes[k]
            );
        }
    }

    #[test]
    fn rank_deficient_patch_is_reported() {
        // A patch whose second column mass lives entirely on coordinate 0,
        // with coordinate 0 excluded from pivoting, cannot finish.
        let u = Matrix::identity(3); // treat first two columns as the basis
        let basis = Matrix::from_fn(3, 2, |i, j| u.get(i, j));
        let patches = PatchSet::new(vec![basis], None).unwrap();
        let err = simpqr_with_options(
            &patches,
            &SimPqrConfig {
                gamma: 1.0,
                eps: 1e-12,
            },
            &SimPqrOptions {
                allow_partial: false,
                excluded_coords: vec![0],
            },
        )
        .unwrap_err();
        match err {
            Error::PatchRankDeficient { patch, completed, rank } => {
                assert_eq!(patch, 0);
                assert_eq!(completed, 1);
                assert_eq!(rank, 2);
            }
            other => panic!("unexpected error {other}"),
        }

        let ok = simpqr_with_options(
            &patches,
            &SimPqrConfig {
                gamma: 1.0,
                eps: 1e-12,
            },
            &SimPqrOptions {
                allow_partial: true,
                excluded_coords: vec![0],
            },
        )
        .unwrap();
        assert_eq!(ok.partial_patches, vec![0]);
    }

    #[test]
    fn invalid_gamma_rejected() {
        let patches = PatchSet::new(vec![random_patch(4, 2, 1)], None).unwrap();
        assert!(simpqr(&patches, &SimPqrConfig { gamma: 0.0, eps: 0.0 }).is_err());
        assert!(simpqr(&patches, &SimPqrConfig { gamma: -1.0, eps: 0.0 }).is_err());
        assert!(simpqr(&patches, &SimPqrConfig { gamma: 1.0, eps: -1e-3 }).is_err());
    }

    #[test]
    fn local_factorizations_are_valid_pqr_factorizations() {
        let patches = PatchSet::new(
            (0..5).map(|s| random_patch(8, 3, 300 + s)).collect(),
            None,
        )
        .unwrap();
        let res = simpqr(
            &patches,
            &SimPqrConfig {
                gamma: 0.2,
                eps: 1e-12,
            },
        )
        .unwrap();
        for (k, factor) in res.compact_factors.iter().enumerate() {
            let (q, r_mat) = crate::linalg::reconstruct_qr(factor);
            let a_t = patches.bases()[k].transpose();
            let permuted = crate::linalg::permute_columns(&a_t, factor);
            let qr = q.matmul(&r_mat);
            let mut diff = 0.0f64;
            for i in 0..qr.rows() {
                for j in 0..qr.cols() {
                    diff += (qr.get(i, j) - permuted.get(i, j)).powi(2);
                }
            }
            assert!(diff.sqrt() <= 1e-10, "patch {k}: residual {}", diff.sqrt());
            // Upper-triangular leading block with diagonal above tolerance.
            for i in 0..factor.stage_count {
                assert!(r_mat.get(i, i).abs() > 0.0);
                for l in 0..i {
                    assert_eq!(r_mat.get(i, l), 0.0);
                }
            }
        }
    }
}
