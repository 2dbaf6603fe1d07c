//! Branch (embedding) coordinates.
//!
//! A coordinate set that immerses the manifold can still leave a discrete
//! ambiguity: distinct points sharing the same values on the immersion
//! coordinates, lying on different branches. This module finds those
//! branches by clustering the points that are close in immersion
//! coordinates, extracts the vectors (or orthonormal bases) separating the
//! branch centroids, and runs the simultaneous factorization on them,
//! restricted to the unselected coordinates, to pick the additional branch
//! coordinates. The immersion coordinates together with the branch
//! coordinates embed the manifold.

use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::matrix::Matrix;
use crate::simpqr::{simpqr_engine, SimPqrConfig, SimPqrOptions};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Points that coincide up to `radius` in the immersion coordinates,
/// grouped into full-space clusters (the branches).
#[derive(Debug, Clone)]
pub struct BranchNeighborhood {
    /// Index of the point the neighborhood was grown around.
    pub center: usize,
    /// Point indices per branch, ordered by smallest member index.
    pub members_by_branch: Vec<Vec<usize>>,
    /// Full-space centroid of each branch.
    pub centroids: Vec<Vec<f64>>,
    /// Immersion-coordinate radius used.
    pub radius: f64,
}

impl BranchNeighborhood {
    pub fn branch_count(&self) -> usize {
        self.members_by_branch.len()
    }
}

/// Separating data feeding the second factorization pass.
#[derive(Debug, Clone)]
pub enum BranchSet {
    /// Pairwise centroid differences, deduplicated up to sign.
    Vectors(Vec<Vec<f64>>),
    /// Orthonormal bases spanning the separation directions per
    /// neighborhood; empty-basis neighborhoods are omitted.
    Bases(Vec<Matrix>),
}

impl BranchSet {
    pub fn is_empty(&self) -> bool {
        match self {
            BranchSet::Vectors(v) => v.is_empty(),
            BranchSet::Bases(b) => b.is_empty(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BranchSet::Vectors(v) => v.len(),
            BranchSet::Bases(b) => b.len(),
        }
    }
}

fn coord_dist_sq(a: &[f64], b: &[f64], coords: &[usize]) -> f64 {
    coords
        .iter()
        .map(|&c| (a[c] - b[c]) * (a[c] - b[c]))
        .sum()
}

fn full_dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Grow a neighborhood of immersion-coordinate radius `rho` around each
/// center and split it into branches by single-linkage clustering in the
/// full space with link threshold `gap_factor * rho`.
///
/// `centers = None` uses every point as a center.
pub fn find_branches(
    points: &Matrix,
    immersion_coords: &[usize],
    rho: f64,
    gap_factor: f64,
    centers: Option<&[usize]>,
) -> Result<Vec<BranchNeighborhood>> {
    if immersion_coords.is_empty() {
        return Err(Error::InvalidConfig {
            field: "immersion_coords",
            message: "need at least one immersion coordinate".into(),
        });
    }
    for &c in immersion_coords {
        if c >= points.cols() {
            return Err(Error::InvalidConfig {
                field: "immersion_coords",
                message: format!("coordinate {c} out of range"),
            });
        }
    }
    if !(rho > 0.0) || !(gap_factor > 0.0) {
        return Err(Error::InvalidConfig {
            field: "rho",
            message: "rho and gap_factor must be positive".into(),
        });
    }

    let all_centers: Vec<usize>;
    let centers = match centers {
        Some(c) => c,
        None => {
            all_centers = (0..points.rows()).collect();
            &all_centers
        }
    };
    let rho_sq = rho * rho;
    let link_sq = (gap_factor * rho) * (gap_factor * rho);

    let neighborhoods: Vec<BranchNeighborhood> = centers
        .par_iter()
        .filter_map(|&center| {
            let cp = points.row(center);
            let members: Vec<usize> = (0..points.rows())
                .filter(|&j| coord_dist_sq(points.row(j), cp, immersion_coords) <= rho_sq)
                .collect();
            if members.is_empty() {
                return None;
            }
            let clusters = single_linkage(points, &members, link_sq);
            let centroids = clusters
                .iter()
                .map(|cluster| {
                    let mut c = vec![0.0; points.cols()];
                    for &j in cluster {
                        for (acc, v) in c.iter_mut().zip(points.row(j)) {
                            *acc += v / cluster.len() as f64;
                        }
                    }
                    c
                })
                .collect();
            Some(BranchNeighborhood {
                center,
                members_by_branch: clusters,
                centroids,
                radius: rho,
            })
        })
        .collect();
    Ok(neighborhoods)
}

/// Single-linkage clustering of `members` with squared link threshold.
fn single_linkage(points: &Matrix, members: &[usize], link_sq: f64) -> Vec<Vec<usize>> {
    let n = members.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        for b in a + 1..n {
            if full_dist_sq(points.row(members[a]), points.row(members[b])) <= link_sq {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        match root_slot[root] {
            Some(slot) => clusters[slot].push(members[i]),
            None => {
                root_slot[root] = Some(clusters.len());
                clusters.push(vec![members[i]]);
            }
        }
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Tolerance for merging separating vectors equal up to sign.
const DEDUP_TOL: f64 = 1e-8;

/// All pairwise centroid differences within each multi-branch neighborhood,
/// deduplicated up to sign. An empty result means the immersion already
/// separates every neighborhood.
pub fn branch_separators(neighborhoods: &[BranchNeighborhood]) -> BranchSet {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut kept_signatures: Vec<Vec<f64>> = Vec::new();
    for nb in neighborhoods {
        for a in 0..nb.centroids.len() {
            for b in a + 1..nb.centroids.len() {
                let w: Vec<f64> = nb.centroids[b]
                    .iter()
                    .zip(&nb.centroids[a])
                    .map(|(x, y)| x - y)
                    .collect();
                let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    continue;
                }
                let signature = sign_normalized(&w, norm);
                let duplicate = kept_signatures.iter().any(|s| {
                    s.iter()
                        .zip(&signature)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                        <= DEDUP_TOL
                });
                if !duplicate {
                    kept.push(w);
                    kept_signatures.push(signature);
                }
            }
        }
    }
    BranchSet::Vectors(kept)
}

/// Unit vector with the sign flipped so its largest-magnitude entry is
/// positive (ties to the lowest index).
fn sign_normalized(w: &[f64], norm: f64) -> Vec<f64> {
    let mut best = 0usize;
    for (i, x) in w.iter().enumerate() {
        if x.abs() > w[best].abs() {
            best = i;
        }
    }
    let flip = if w[best] < 0.0 { -1.0 } else { 1.0 };
    w.iter().map(|x| flip * x / norm).collect()
}

/// Orthonormal basis of the separation directions of one neighborhood:
/// principal components of the raw member points whose RMS singular value
/// exceeds `2 * rho`. Returns an n x b matrix with possibly zero columns
/// count (a single tight cluster has none).
pub fn branch_basis_local_pca(
    neighborhood: &BranchNeighborhood,
    points: &Matrix,
    rho: f64,
) -> Matrix {
    let members: Vec<usize> = neighborhood
        .members_by_branch
        .iter()
        .flatten()
        .copied()
        .collect();
    let n = points.cols();
    let count = members.len();
    if count < 2 {
        return Matrix::zeros(n, 0);
    }
    let mut mean = vec![0.0; n];
    for &j in &members {
        for (acc, v) in mean.iter_mut().zip(points.row(j)) {
            *acc += v / count as f64;
        }
    }
    let centered = Matrix::from_fn(count, n, |i, col| points.get(members[i], col) - mean[col]);
    let svd = thin_svd(&centered);
    // RMS scaling makes the retention threshold independent of how many
    // points happen to fall in the neighborhood.
    let scale = 1.0 / (count as f64).sqrt();
    let retained: Vec<usize> = (0..svd.s.len())
        .filter(|&l| svd.s[l] * scale > 2.0 * rho)
        .collect();
    Matrix::from_fn(n, retained.len(), |i, j| svd.v.get(i, retained[j]))
}

/// Branch bases for all neighborhoods, dropping the empty ones.
pub fn branch_bases(
    neighborhoods: &[BranchNeighborhood],
    points: &Matrix,
    rho: f64,
) -> BranchSet {
    let bases: Vec<Matrix> = neighborhoods
        .iter()
        .map(|nb| branch_basis_local_pca(nb, points, rho))
        .filter(|b| b.cols() > 0)
        .collect();
    BranchSet::Bases(bases)
}

/// Select branch coordinates: run the simultaneous factorization treating
/// each separating vector (or basis) as a patch, with pivots restricted to
/// the complement of the immersion coordinates.
///
/// Empty input yields an empty coordinate set (nothing to separate).
pub fn select_branch_coords(
    branch_set: &BranchSet,
    immersion_coords: &[usize],
    cfg: &SimPqrConfig,
) -> Result<Vec<usize>> {
    let transposed: Vec<Matrix> = match branch_set {
        BranchSet::Vectors(ws) => ws
            .iter()
            .map(|w| {
                let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(Error::BranchData {
                        message: "zero separating vector".into(),
                    });
                }
                Matrix::new(1, w.len(), w.iter().map(|x| x / norm).collect())
            })
            .collect::<Result<_>>()?,
        BranchSet::Bases(bs) => bs.iter().map(Matrix::transpose).collect(),
    };
    if transposed.is_empty() {
        return Ok(Vec::new());
    }
    let opts = SimPqrOptions {
        allow_partial: false,
        excluded_coords: immersion_coords.to_vec(),
    };
    let result = simpqr_engine(transposed, cfg, &opts).map_err(|e| match e {
        Error::PatchRankDeficient { patch, .. } => Error::BranchData {
            message: format!(
                "separating vector/basis {patch} has no usable magnitude outside the \
                 immersion coordinates at the given tolerance"
            ),
        },
        other => other,
    })?;
    Ok(result.pivots)
}

/// Outcome of the branch-recovery robustness check.
#[derive(Debug, Clone, Serialize)]
pub struct BranchRobustnessReport {
    /// Number of (pair, noise) trials run.
    pub trials: usize,
    /// Trials whose noisy point stayed nearest its own branch.
    pub correct: usize,
    /// Worst distance gap over the tightness (exact half-gap) checks;
    /// zero up to round-off by construction.
    pub max_tie_gap: f64,
    /// Branch pairs available for sampling.
    pub pairs: usize,
}

/// Monte Carlo check of branch recovery: for random branch pairs `(y, z)`
/// and noise with norm `noise_fraction` times the half-gap
/// `0.5 * ||P_B^T (y - z)||`, the noisy point must classify to its own
/// branch in the selected coordinates. Also verifies the tightness case:
/// the specific disturbance of exactly half the projected gap makes the
/// distances tie.
pub fn verify_branch_robustness(
    neighborhoods: &[BranchNeighborhood],
    branch_coords: &[usize],
    trials: usize,
    noise_fraction: f64,
    seed: u64,
) -> Result<BranchRobustnessReport> {
    if !(noise_fraction > 0.0 && noise_fraction < 1.0) {
        return Err(Error::InvalidConfig {
            field: "noise_fraction",
            message: format!("must lie in (0, 1), got {noise_fraction}"),
        });
    }
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for nb in neighborhoods {
        for a in 0..nb.centroids.len() {
            for b in a + 1..nb.centroids.len() {
                pairs.push((nb.centroids[a].clone(), nb.centroids[b].clone()));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(BranchRobustnessReport {
            trials: 0,
            correct: 0,
            max_tie_gap: 0.0,
            pairs: 0,
        });
    }

    let proj_dist = |a: &[f64], b: &[f64]| -> f64 {
        branch_coords
            .iter()
            .map(|&c| (a[c] - b[c]) * (a[c] - b[c]))
            .sum::<f64>()
            .sqrt()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pairs[0].0.len();
    let mut correct = 0usize;
    for _ in 0..trials {
        let (y, z) = &pairs[rng.gen_range(0..pairs.len())];
        let half_gap = 0.5 * proj_dist(y, z);
        // Random direction on the unit sphere via normalized Gaussians.
        let mut noise: Vec<f64> = (0..n)
            .map(|_| {
                // Box-Muller from two uniforms.
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let norm: f64 = noise.iter().map(|x| x * x).sum::<f64>().sqrt();
        let target = noise_fraction * half_gap;
        noise.iter_mut().for_each(|x| *x *= target / norm);

        let noisy: Vec<f64> = y.iter().zip(&noise).map(|(a, b)| a + b).collect();
        if proj_dist(&noisy, y) < proj_dist(&noisy, z) {
            correct += 1;
        }
    }

    // Tightness: noise of exactly half the projected gap, aligned with it,
    // is equidistant from both branches in the selected coordinates.
    let mut max_tie_gap = 0.0f64;
    for (y, z) in pairs.iter().take(64) {
        let mut noisy = y.clone();
        for &c in branch_coords {
            noisy[c] += 0.5 * (z[c] - y[c]);
        }
        let gap = (proj_dist(&noisy, y) - proj_dist(&noisy, z)).abs();
        max_tie_gap = max_tie_gap.max(gap);
    }

    Ok(BranchRobustnessReport {
        trials,
        correct,
        max_tie_gap,
        pairs: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::gen_spiral;

    fn two_plane_points() -> Matrix {
        // Two parallel plane patches at x3 = 0 and x3 = 1 over the same
        // (x1, x2) footprint.
        let mut rows = Vec::new();
        let mut state = 11u64;
        let mut rng = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..60 {
            let (x, y) = (rng(), rng());
            rows.push(vec![x, y, 0.0]);
            rows.push(vec![x + 0.001 * rng(), y + 0.001 * rng(), 1.0]);
        }
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn two_plane_neighborhoods_have_two_clusters() {
        let points = two_plane_points();
        let nbs = find_branches(&points, &[0, 1], 0.1, 3.0, None).unwrap();
        assert!(!nbs.is_empty());
        for nb in &nbs {
            assert_eq!(nb.branch_count(), 2, "center {}", nb.center);
        }
        let seps = branch_separators(&nbs);
        let BranchSet::Vectors(ws) = &seps else {
            panic!()
        };
        assert!(!ws.is_empty());
        for w in ws {
            // Separation is essentially e3.
            let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((w[2].abs() / norm) > 0.999, "{w:?}");
        }
    }

    #[test]
    fn single_branch_data_has_one_cluster_and_no_separators() {
        // A single plane: every neighborhood is one cluster.
        let mut rows = Vec::new();
        let mut state = 13u64;
        let mut rng = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..80 {
            rows.push(vec![rng(), rng(), 0.0]);
        }
        let points = Matrix::from_rows(&rows).unwrap();
        let nbs = find_branches(&points, &[0, 1], 0.1, 3.0, None).unwrap();
        for nb in &nbs {
            assert_eq!(nb.branch_count(), 1);
        }
        let seps = branch_separators(&nbs);
        assert!(seps.is_empty());
        let coords =
            select_branch_coords(&seps, &[0, 1], &SimPqrConfig { gamma: 1.0, eps: 1e-8 })
                .unwrap();
        assert!(coords.is_empty());
    }

    #[test]
    fn three_clusters_give_three_pairwise_vectors() {
        let nb = BranchNeighborhood {
            center: 0,
            members_by_branch: vec![vec![0], vec![1], vec![2]],
            centroids: vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 1.0, 0.5],
            ],
            radius: 0.1,
        };
        let BranchSet::Vectors(ws) = branch_separators(&[nb]) else {
            panic!()
        };
        assert_eq!(ws.len(), 3);
    }

    #[test]
    fn separator_set_is_sign_invariant_under_permutation() {
        let points = two_plane_points();
        let nbs = find_branches(&points, &[0, 1], 0.1, 3.0, None).unwrap();
        let BranchSet::Vectors(forward) = branch_separators(&nbs) else {
            panic!()
        };
        let mut reversed_nbs = nbs.clone();
        reversed_nbs.reverse();
        for nb in &mut reversed_nbs {
            nb.members_by_branch.reverse();
            nb.centroids.reverse();
        }
        let BranchSet::Vectors(backward) = branch_separators(&reversed_nbs) else {
            panic!()
        };
        assert_eq!(forward.len(), backward.len());
        for w in &backward {
            let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let sig = sign_normalized(w, norm);
            let matched = forward.iter().any(|f| {
                let fn_: f64 = f.iter().map(|x| x * x).sum::<f64>().sqrt();
                let fsig = sign_normalized(f, fn_);
                fsig.iter()
                    .zip(&sig)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    <= 1e-6
            });
            assert!(matched);
        }
    }

    #[test]
    fn pca_basis_keeps_only_wide_directions() {
        // Two tight clusters 10 rho apart along e2.
        let rho = 0.1;
        let mut rows = Vec::new();
        for i in 0..20 {
            let jitter = 0.01 * (i as f64 / 20.0 - 0.5);
            rows.push(vec![jitter, 0.0, 0.3 * jitter]);
            rows.push(vec![-jitter, 10.0 * rho, -0.2 * jitter]);
        }
        let points = Matrix::from_rows(&rows).unwrap();
        let nb = BranchNeighborhood {
            center: 0,
            members_by_branch: vec![(0..40).step_by(2).collect(), (1..40).step_by(2).collect()],
            centroids: vec![vec![0.0; 3], vec![0.0, 1.0, 0.0]],
            radius: rho,
        };
        let basis = branch_basis_local_pca(&nb, &points, rho);
        assert_eq!(basis.cols(), 1);
        assert!(basis.get(1, 0).abs() > 0.999);

        // A single tight cluster (diameter < rho) yields an empty basis.
        let tight_rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![0.001 * i as f64, 0.0, 0.0])
            .collect();
        let tight = Matrix::from_rows(&tight_rows).unwrap();
        let nb_tight = BranchNeighborhood {
            center: 0,
            members_by_branch: vec![(0..30).collect()],
            centroids: vec![vec![0.0; 3]],
            radius: rho,
        };
        assert_eq!(branch_basis_local_pca(&nb_tight, &tight, rho).cols(), 0);
    }

    #[test]
    fn axis_vectors_select_their_axes() {
        let mut e4 = vec![0.0; 8];
        e4[4] = 1.0;
        let set = BranchSet::Vectors(vec![e4.clone()]);
        let coords =
            select_branch_coords(&set, &[0, 1], &SimPqrConfig { gamma: 1.0, eps: 1e-8 }).unwrap();
        assert_eq!(coords, vec![4]);

        let mut e7 = vec![0.0; 8];
        e7[7] = 1.0;
        let set = BranchSet::Vectors(vec![e4, e7]);
        let coords =
            select_branch_coords(&set, &[0, 1], &SimPqrConfig { gamma: 0.5, eps: 1e-8 }).unwrap();
        let mut sorted = coords.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![4, 7]);
    }

    #[test]
    fn separator_inside_immersion_span_is_a_data_error() {
        let mut w = vec![0.0; 4];
        w[0] = 1.0; // entirely inside the immersion coordinates
        let set = BranchSet::Vectors(vec![w]);
        let err =
            select_branch_coords(&set, &[0, 1], &SimPqrConfig { gamma: 1.0, eps: 1e-8 })
                .unwrap_err();
        assert!(matches!(err, Error::BranchData { .. }));
    }

    #[test]
    fn spiral_branch_pipeline_recovers_vertical_coordinate() {
        let sample = gen_spiral(1000, 42).unwrap();
        let rho = 0.1;
        let nbs = find_branches(&sample.points, &[0, 1], rho, 3.0, None).unwrap();
        let multi: Vec<&BranchNeighborhood> =
            nbs.iter().filter(|nb| nb.branch_count() >= 2).collect();
        assert!(
            !multi.is_empty(),
            "the angular seam must produce multi-branch neighborhoods"
        );

        // Vector route. Centroids also drift inside the rho-disk in the
        // plane, so individual separators can tilt by up to about
        // atan(2 rho / gap) ~ 13 degrees; the median stays tight.
        let seps = branch_separators(&nbs);
        let BranchSet::Vectors(ws) = &seps else {
            panic!()
        };
        let mut angles: Vec<f64> = ws
            .iter()
            .map(|w| {
                let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                (w[2].abs() / norm).clamp(0.0, 1.0).acos()
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        assert!(angles[angles.len() / 2] <= 8.0f64.to_radians());
        assert!(*angles.last().unwrap() <= 15.0f64.to_radians());
        let k = seps.len() as f64;
        let coords = select_branch_coords(
            &seps,
            &[0, 1],
            &SimPqrConfig {
                gamma: 1.0 / k,
                eps: 1e-4,
            },
        )
        .unwrap();
        assert_eq!(coords, vec![2]);

        // Basis route: every retained basis is a single near-vertical
        // column, with the same geometric tilt as the separators.
        let bases = branch_bases(&nbs, &sample.points, rho);
        assert!(!bases.is_empty());
        if let BranchSet::Bases(bs) = &bases {
            for b in bs {
                assert_eq!(b.cols(), 1);
                assert!(b.get(2, 0).abs() >= (15.0f64.to_radians()).cos());
            }
        }
        let kb = bases.len() as f64;
        let coords = select_branch_coords(
            &bases,
            &[0, 1],
            &SimPqrConfig {
                gamma: 1.0 / kb,
                eps: 1e-4,
            },
        )
        .unwrap();
        assert_eq!(coords, vec![2]);

        // Embedding certificate: with the branch coordinate added, every
        // neighborhood collapses to a single cluster.
        let embedded = find_branches(&sample.points, &[0, 1, 2], rho, 3.0, None).unwrap();
        for nb in &embedded {
            assert_eq!(nb.branch_count(), 1, "center {}", nb.center);
        }
    }

    #[test]
    fn robustness_classification_and_tightness() {
        let nb = BranchNeighborhood {
            center: 0,
            members_by_branch: vec![vec![0], vec![1]],
            centroids: vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
            radius: 0.1,
        };
        let report = verify_branch_robustness(&[nb], &[2], 500, 0.98, 7).unwrap();
        assert_eq!(report.correct, report.trials);
        assert!(report.max_tie_gap <= 1e-12);
    }
}
