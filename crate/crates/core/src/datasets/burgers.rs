//! Periodic viscous Burgers solver for snapshot-grid generation.
//!
//! Discretization: conservation-form central differences for the advective
//! flux `u^2 / 2`, second-order central diffusion, explicit RK4 in time with
//! the step chosen by `dt = cfl * min(dx / max|u|, dx^2 / (2 nu))`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use rayon::prelude::*;

/// One simulation: snapshots of `u(t, xi)` for a single initial width.
#[derive(Debug, Clone)]
pub struct BurgersRun {
    pub nu: f64,
    pub chi: f64,
    pub n_x: usize,
    /// Time between consecutive snapshot rows.
    pub dt_snap: f64,
    /// Snapshot matrix, one state per row; row 0 is the initial condition.
    pub snapshots: Matrix,
}

impl BurgersRun {
    /// Spatial grid location of column `j`.
    pub fn xi(&self, j: usize) -> f64 {
        j as f64 / self.n_x as f64
    }
}

pub const DEFAULT_CFL: f64 = 0.25;

/// Integrate the triangular initial condition of width `chi` for each entry
/// of `chi_list`, recording `n_snap` evenly spaced snapshots over
/// `[0, t_final]` (initial condition included).
pub fn burgers_grid(
    nu: f64,
    chi_list: &[f64],
    n_x: usize,
    t_final: f64,
    n_snap: usize,
) -> Result<Vec<BurgersRun>> {
    burgers_grid_with_cfl(nu, chi_list, n_x, t_final, n_snap, DEFAULT_CFL)
}

pub fn burgers_grid_with_cfl(
    nu: f64,
    chi_list: &[f64],
    n_x: usize,
    t_final: f64,
    n_snap: usize,
    cfl: f64,
) -> Result<Vec<BurgersRun>> {
    if n_x < 16 || !n_x.is_power_of_two() {
        return Err(Error::InvalidConfig {
            field: "n_x",
            message: format!("grid size must be a power of two >= 16, got {n_x}"),
        });
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidConfig {
            field: "nu",
            message: format!("viscosity must be positive, got {nu}"),
        });
    }
    if n_snap < 2 || !(t_final > 0.0) || !(cfl > 0.0) {
        return Err(Error::InvalidConfig {
            field: "t_final",
            message: "need t_final > 0, n_snap >= 2 and cfl > 0".into(),
        });
    }
    for &chi in chi_list {
        if !(0.1..=0.5).contains(&chi) {
            return Err(Error::InvalidConfig {
                field: "chi",
                message: format!("initial width must lie in [0.1, 0.5], got {chi}"),
            });
        }
    }

    chi_list
        .par_iter()
        .map(|&chi| simulate(nu, chi, n_x, t_final, n_snap, cfl))
        .collect()
}

/// Triangular pulse of width `chi` centered at 0.5.
fn initial_condition(chi: f64, n_x: usize) -> Vec<f64> {
    (0..n_x)
        .map(|j| {
            let xi = j as f64 / n_x as f64;
            (1.0 - (2.0 / chi) * (xi - 0.5).abs()).max(0.0)
        })
        .collect()
}

fn rhs(u: &[f64], nu: f64, dx: f64, out: &mut [f64]) {
    let n = u.len();
    for i in 0..n {
        let ip = if i + 1 == n { 0 } else { i + 1 };
        let im = if i == 0 { n - 1 } else { i - 1 };
        let conv = (0.5 * u[ip] * u[ip] - 0.5 * u[im] * u[im]) / (2.0 * dx);
        let diff = nu * (u[ip] - 2.0 * u[i] + u[im]) / (dx * dx);
        out[i] = diff - conv;
    }
}

fn simulate(
    nu: f64,
    chi: f64,
    n_x: usize,
    t_final: f64,
    n_snap: usize,
    cfl: f64,
) -> Result<BurgersRun> {
    let dx = 1.0 / n_x as f64;
    let dt_snap = t_final / (n_snap - 1) as f64;
    let mut u = initial_condition(chi, n_x);
    let mut snapshots: Vec<Vec<f64>> = Vec::with_capacity(n_snap);
    snapshots.push(u.clone());

    let mut k1 = vec![0.0; n_x];
    let mut k2 = vec![0.0; n_x];
    let mut k3 = vec![0.0; n_x];
    let mut k4 = vec![0.0; n_x];
    let mut tmp = vec![0.0; n_x];

    let mut t = 0.0;
    for s in 1..n_snap {
        let t_target = s as f64 * dt_snap;
        while t < t_target - 1e-14 {
            let umax = u.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            let dt_adv = if umax > 0.0 { dx / umax } else { f64::INFINITY };
            let dt_diff = dx * dx / (2.0 * nu);
            let dt = (cfl * dt_adv.min(dt_diff)).min(t_target - t);
            if !(dt > 0.0) {
                return Err(Error::Instability { time: t });
            }

            rhs(&u, nu, dx, &mut k1);
            for i in 0..n_x {
                tmp[i] = u[i] + 0.5 * dt * k1[i];
            }
            rhs(&tmp, nu, dx, &mut k2);
            for i in 0..n_x {
                tmp[i] = u[i] + 0.5 * dt * k2[i];
            }
            rhs(&tmp, nu, dx, &mut k3);
            for i in 0..n_x {
                tmp[i] = u[i] + dt * k3[i];
            }
            rhs(&tmp, nu, dx, &mut k4);
            for i in 0..n_x {
                u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += dt;
            if !u.iter().all(|v| v.is_finite()) {
                return Err(Error::Instability { time: t });
            }
        }
        t = t_target;
        snapshots.push(u.clone());
    }

    Ok(BurgersRun {
        nu,
        chi,
        n_x,
        dt_snap,
        snapshots: Matrix::from_rows(&snapshots)?,
    })
}

/// Rearrange runs into a grid of states indexed `[time][width]`, the layout
/// consumed by the grid-based tangent estimator. All runs must share the
/// snapshot count and grid size.
pub fn snapshot_grid(runs: &[BurgersRun]) -> Vec<Vec<Vec<f64>>> {
    let n_snap = runs.first().map_or(0, |r| r.snapshots.rows());
    (0..n_snap)
        .map(|s| {
            runs.iter()
                .map(|r| r.snapshots.row(s).to_vec())
                .collect()
        })
        .collect()
}
