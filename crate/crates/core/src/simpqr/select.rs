//! Per-stage coordinate and patch selection.
//!
//! Each stage maximizes
//!
//! ```text
//! |S| / S_max  +  gamma * min_{k in S} sqrt(c_k(j) / C_k)
//! ```
//!
//! over coordinates `j` and patch subsets `S` of the patches whose residual
//! at `j` exceeds the tolerance. For fixed `j` the optimum over subsets is a
//! prefix of the patches sorted by the normalized magnitude, so the search
//! costs O(n K log K).

/// Outcome of one stage selection.
#[derive(Debug, Clone)]
pub struct Selection {
    /// Chosen coordinate.
    pub j_star: usize,
    /// Chosen patches, in descending order of normalized magnitude.
    pub s_star: Vec<usize>,
    /// Value of the maximized objective.
    pub objective: f64,
    /// Largest number of patches any single coordinate could serve.
    pub s_max: usize,
    /// Normalized magnitudes sqrt(c_k(j*) / C_k) aligned with `s_star`.
    pub thetas: Vec<f64>,
    /// Largest positive objective crossing strictly below `gamma`
    /// (`-inf` when none): lowering gamma past it changes this selection.
    pub gamma_lower: f64,
    /// Smallest objective crossing strictly above `gamma` (`+inf` when none).
    pub gamma_upper: f64,
}

/// Solve the stage problem on residual magnitudes `c` restricted to
/// `eligible` entries with `c > eps`. Returns `None` when no coordinate is
/// available on any patch, which signals completion rather than an error.
///
/// Ties in the objective prefer a larger patch set, then a lower coordinate
/// index; the sort over patches is by descending magnitude with ties by
/// ascending patch index. All of this makes the selection deterministic.
pub fn select_pivot(
    c: &[Vec<f64>],
    eligible: &[Vec<bool>],
    gamma: f64,
    eps: f64,
) -> Option<Selection> {
    let c_refs: Vec<&[f64]> = c.iter().map(Vec::as_slice).collect();
    let e_refs: Vec<&[bool]> = eligible.iter().map(Vec::as_slice).collect();
    select_pivot_impl(&c_refs, &e_refs, gamma, eps)
}

pub(crate) fn select_pivot_impl(
    c: &[&[f64]],
    eligible: &[&[bool]],
    gamma: f64,
    eps: f64,
) -> Option<Selection> {
    let patch_count = c.len();
    let n = c.first().map_or(0, |row| row.len());

    // Per-patch maxima over eligible coordinates; the magnitude a
    // Businger-Golub pivot would take on that patch.
    let mut c_max = vec![0.0f64; patch_count];
    for k in 0..patch_count {
        for j in 0..n {
            if eligible[k][j] && c[k][j] > c_max[k] {
                c_max[k] = c[k][j];
            }
        }
    }

    // Sorted normalized magnitudes per coordinate, over valid patches only.
    let mut sorted: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
    let mut s_max = 0usize;
    for (j, lane) in sorted.iter_mut().enumerate() {
        for k in 0..patch_count {
            if eligible[k][j] && c[k][j] > eps {
                lane.push(((c[k][j] / c_max[k]).sqrt(), k));
            }
        }
        lane.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        s_max = s_max.max(lane.len());
    }
    if s_max == 0 {
        return None;
    }

    let mut best_obj = f64::NEG_INFINITY;
    let mut best_l = 0usize;
    let mut best_j = 0usize;
    for (j, lane) in sorted.iter().enumerate() {
        for (l0, &(theta, _)) in lane.iter().enumerate() {
            let l = l0 + 1;
            let obj = l as f64 / s_max as f64 + gamma * theta;
            let better = obj > best_obj || (obj == best_obj && l > best_l);
            if better {
                best_obj = obj;
                best_l = l;
                best_j = j;
            }
        }
    }

    // Crossing pass: for each candidate pair, the gamma at which its
    // objective line meets the winner's. Lines with equal slope never cross;
    // crossings at gamma <= 0 are outside the parameter domain.
    let j1_star = best_l as f64 / s_max as f64;
    let j2_star = sorted[best_j][best_l - 1].0;
    let mut gamma_lower = f64::NEG_INFINITY;
    let mut gamma_upper = f64::INFINITY;
    for lane in &sorted {
        for (l0, &(theta, _)) in lane.iter().enumerate() {
            if theta == j2_star {
                continue;
            }
            let j1 = (l0 + 1) as f64 / s_max as f64;
            let crossing = (j1_star - j1) / (theta - j2_star);
            if crossing > 0.0 && crossing < gamma && crossing > gamma_lower {
                gamma_lower = crossing;
            }
            if crossing > gamma && crossing < gamma_upper {
                gamma_upper = crossing;
            }
        }
    }

    let lane = &sorted[best_j];
    Some(Selection {
        j_star: best_j,
        s_star: lane[..best_l].iter().map(|&(_, k)| k).collect(),
        objective: best_obj,
        s_max,
        thetas: lane[..best_l].iter().map(|&(t, _)| t).collect(),
        gamma_lower,
        gamma_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_eligible(k: usize, n: usize) -> Vec<Vec<bool>> {
        vec![vec![true; n]; k]
    }

    /// Exhaustive reference: enumerate every coordinate and every nonempty
    /// subset of its valid patches.
    pub(crate) fn exhaustive_best(
        c: &[Vec<f64>],
        eligible: &[Vec<bool>],
        gamma: f64,
        eps: f64,
    ) -> Option<(f64, usize, usize)> {
        let patch_count = c.len();
        let n = c[0].len();
        let mut c_max = vec![0.0f64; patch_count];
        for k in 0..patch_count {
            for j in 0..n {
                if eligible[k][j] && c[k][j] > c_max[k] {
                    c_max[k] = c[k][j];
                }
            }
        }
        let mut s_max = 0usize;
        let mut valid: Vec<Vec<usize>> = vec![Vec::new(); n];
        for j in 0..n {
            for k in 0..patch_count {
                if eligible[k][j] && c[k][j] > eps {
                    valid[j].push(k);
                }
            }
            s_max = s_max.max(valid[j].len());
        }
        if s_max == 0 {
            return None;
        }
        // (objective, |S|, lowest j attaining both)
        let mut best: Option<(f64, usize, usize)> = None;
        for j in 0..n {
            let v = &valid[j];
            for mask in 1u32..(1 << v.len()) {
                let mut size = 0usize;
                let mut min_theta = f64::INFINITY;
                for (b, &k) in v.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        size += 1;
                        min_theta = min_theta.min((c[k][j] / c_max[k]).sqrt());
                    }
                }
                let obj = size as f64 / s_max as f64 + gamma * min_theta;
                let better = match best {
                    None => true,
                    Some((bo, bs, bj)) => {
                        obj > bo
                            || (obj == bo && size > bs)
                            || (obj == bo && size == bs && j < bj)
                    }
                };
                if better {
                    best = Some((obj, size, j));
                }
            }
        }
        best
    }

    #[test]
    fn single_patch_reduces_to_argmax() {
        let c = vec![vec![1.0, 4.0, 2.0]];
        let sel = select_pivot(&c, &all_eligible(1, 3), 0.7, 0.0).unwrap();
        assert_eq!(sel.j_star, 1);
        assert_eq!(sel.s_star, vec![0]);
        assert_eq!(sel.s_max, 1);
        // Single patch: no crossing matters on gamma > 0.
        assert_eq!(sel.gamma_lower, f64::NEG_INFINITY);
        assert_eq!(sel.gamma_upper, f64::INFINITY);
    }

    #[test]
    fn two_patch_sharing_regime() {
        // c = [[4,1],[1,4]], gamma = 0.25 <= 1/K: share both patches.
        // Candidates at j=0: thetas are 1 (patch 0) and 1/2 (patch 1).
        // Best: l=2, objective = 2/2 + 0.25 * 0.5 = 1.125; j=0 by index rule.
        let c = vec![vec![4.0, 1.0], vec![1.0, 4.0]];
        let sel = select_pivot(&c, &all_eligible(2, 2), 0.25, 0.0).unwrap();
        assert_eq!(sel.j_star, 0);
        assert_eq!(sel.s_star.len(), 2);
        assert!((sel.objective - 1.125).abs() < 1e-15);
        // Crossing where l=1 line overtakes l=2 line: 0.5 + g = 1 + 0.5 g.
        assert!((sel.gamma_upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_patch_volume_regime() {
        // Same magnitudes with gamma = 10: per-patch maxima dominate.
        let c = vec![vec![4.0, 1.0], vec![1.0, 4.0]];
        let sel = select_pivot(&c, &all_eligible(2, 2), 10.0, 0.0).unwrap();
        assert_eq!(sel.j_star, 0);
        assert_eq!(sel.s_star, vec![0]);
        assert!((sel.objective - (0.5 + 10.0)).abs() < 1e-15);
    }

    #[test]
    fn all_zero_residuals_signal_completion() {
        let c = vec![vec![0.0, 0.0]];
        assert!(select_pivot(&c, &all_eligible(1, 2), 1.0, 0.0).is_none());
    }

    #[test]
    fn matches_exhaustive_enumeration_small() {
        let mut state = 7u64;
        let mut rng = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..300 {
            let k = 1 + (rng() * 4.0) as usize;
            let n = 1 + (rng() * 5.0) as usize;
            let gamma = 0.05 + rng() * 4.0;
            let c: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|_| if rng() < 0.2 { 0.0 } else { rng() }).collect())
                .collect();
            let eligible = all_eligible(k, n);
            let eps = 1e-12;
            let got = select_pivot(&c, &eligible, gamma, eps);
            let want = exhaustive_best(&c, &eligible, gamma, eps);
            match (got, want) {
                (None, None) => {}
                (Some(sel), Some((obj, size, j))) => {
                    assert!(
                        (sel.objective - obj).abs() <= 1e-12 * obj.abs().max(1.0),
                        "trial {trial}: objective {} vs {}",
                        sel.objective,
                        obj
                    );
                    assert_eq!(sel.s_star.len(), size, "trial {trial}: subset size");
                    assert_eq!(sel.j_star, j, "trial {trial}: coordinate");
                }
                other => panic!("trial {trial}: mismatch {other:?}"),
            }
        }
    }
}
