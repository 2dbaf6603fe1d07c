//! The solution path over the trade-off parameter.
//!
//! The factorization changes at finitely many parameter values. Starting at
//! `gamma = 1/K`, each run reports the nearest breakpoint above the value it
//! used; re-running just past that breakpoint yields the next segment, until
//! no further breakpoint exists.

use super::{simpqr, PatchSet, SimPqrConfig, SimPqrResult};
use crate::error::{Error, Result};

/// One maximal parameter interval with a constant stage sequence.
#[derive(Debug, Clone)]
pub struct GammaSegment {
    /// Interval covered by this segment; the last segment has
    /// `gamma_hi = +inf`.
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    /// Representative parameter the stored result was computed at.
    pub gamma_rep: f64,
    pub result: SimPqrResult,
}

pub const DEFAULT_PATH_BUDGET: usize = 10_000;

/// Relative nudge placed after a breakpoint to land inside the next segment.
const NUDGE_REL: f64 = 1e-9;
/// Slack when checking that a run's lower neighbor matches the previous
/// breakpoint (they are computed from different stage trajectories).
const BOUNDARY_SLACK_REL: f64 = 1e-11;

/// Sweep the whole solution path for the given tolerance.
///
/// Consecutive segments tile `(1/K, inf)`. Segments whose stage sequences
/// are identical (possible at degenerate equal-objective crossings) are
/// merged. Re-running at any interior parameter of a segment reproduces the
/// stored stage sequence.
pub fn gamma_path(patches: &PatchSet, eps: f64) -> Result<Vec<GammaSegment>> {
    gamma_path_with_budget(patches, eps, DEFAULT_PATH_BUDGET)
}

pub fn gamma_path_with_budget(
    patches: &PatchSet,
    eps: f64,
    budget: usize,
) -> Result<Vec<GammaSegment>> {
    let start = 1.0 / patches.patch_count() as f64;
    let mut segments: Vec<GammaSegment> = Vec::new();

    let mut rep = start;
    let mut lo = start;
    let mut result = simpqr(patches, &SimPqrConfig { gamma: rep, eps })?;

    loop {
        if segments.len() >= budget {
            return Err(Error::PathBudget { budget });
        }
        let hi = result.gamma_neighbors.gamma_plus;
        let merged = segments
            .last_mut()
            .filter(|prev| prev.result.stage_signatures() == result.stage_signatures());
        match merged {
            Some(prev) => prev.gamma_hi = hi,
            None => segments.push(GammaSegment {
                gamma_lo: lo,
                gamma_hi: hi,
                gamma_rep: rep,
                result: result.clone(),
            }),
        }
        if !hi.is_finite() {
            break;
        }

        // Land inside the adjacent segment: nudge past the breakpoint and
        // bisect back towards it if the nudge overshot a nearby crossing.
        let mut candidate = hi * (1.0 + NUDGE_REL);
        let mut next = simpqr(patches, &SimPqrConfig { gamma: candidate, eps })?;
        let mut tries = 0;
        while next.gamma_neighbors.gamma_minus > hi * (1.0 + BOUNDARY_SLACK_REL) {
            let mid = 0.5 * (hi + next.gamma_neighbors.gamma_minus);
            if !(mid > hi) || mid >= candidate || tries >= 200 {
                // Crossings are closer than f64 resolution; accept the run.
                break;
            }
            candidate = mid;
            next = simpqr(patches, &SimPqrConfig { gamma: candidate, eps })?;
            tries += 1;
        }
        lo = hi;
        rep = candidate;
        result = next;
    }
    Ok(segments)
}
