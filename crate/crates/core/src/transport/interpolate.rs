use alloc::vec;
use alloc::vec::Vec;

use super::{lp_transport, TransportPlan};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::math;

/// Barycentric projection `T(x_i) = Σ_j γ_ij y_j / Σ_j γ_ij`.
/// Cells that send no mass map to `None`.
pub fn barycentric_map(plan: &TransportPlan) -> Vec<Option<[f64; 2]>> {
    let src = plan.source_grid();
    let tgt = plan.target_grid();
    let mut acc = vec![[0.0; 3]; src.len()];
    for &(i, j, m) in plan.entries() {
        let y = tgt.center(j);
        acc[i][0] += m * y[0];
        acc[i][1] += m * y[1];
        acc[i][2] += m;
    }
    acc.into_iter()
        .map(|[x, y, m]| if m > 0.0 { Some([x / m, y / m]) } else { None })
        .collect()
}

/// Optimal map from `a` to `b` through the exact plan.
pub fn optimal_map(a: &DensityField, b: &DensityField, tol: &Tolerances) -> Result<Vec<Option<[f64; 2]>>> {
    Ok(barycentric_map(&lp_transport(a, b, tol)?.plan))
}

/// Moves each plan atom to `(1 − t)x + t y` and spreads its mass over the
/// neighbouring cell centers with tent weights (bilinear in 2D). Positions
/// are computed in lattice units, so `t = 0` and `t = 1` land exactly on cell
/// centers.
pub fn displacement_interpolate(a: &DensityField, plan: &TransportPlan, t: f64) -> Result<DensityField> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid("interpolation time must lie in [0, 1]"));
    }
    let grid = *a.grid();
    if plan.source_grid() != &grid || plan.target_grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let rows = plan.row_sums();
    let cv = grid.cell_volume();
    let scale = a.values().iter().map(|v| v * cv).fold(0.0, f64::max).max(1e-300);
    for (r, v) in rows.iter().zip(a.values()) {
        if (r - v * cv).abs() > 1e-9 * scale.max(1.0) {
            return Err(Error::invalid("plan does not have the density as first marginal"));
        }
    }
    let mut mass = vec![0.0; grid.len()];
    let dim = grid.dim();
    for &(i, j, m) in plan.entries() {
        let (ix, iy) = grid.coords(i);
        let (jx, jy) = grid.coords(j);
        let s = [
            ix as f64 + t * (jx as f64 - ix as f64),
            iy as f64 + t * (jy as f64 - iy as f64),
        ];
        let mut idx = [[0usize; 2]; 2];
        let mut w = [[1.0, 0.0]; 2];
        for axis in 0..dim {
            let n = grid.cells(axis);
            let k = math::floor(s[axis]);
            let frac = s[axis] - k;
            let k = k as usize;
            if frac == 0.0 || k + 1 >= n {
                idx[axis] = [k.min(n - 1), k.min(n - 1)];
                w[axis] = [1.0, 0.0];
            } else {
                idx[axis] = [k, k + 1];
                w[axis] = [1.0 - frac, frac];
            }
        }
        if dim == 1 {
            mass[idx[0][0]] += m * w[0][0];
            mass[idx[0][1]] += m * w[0][1];
        } else {
            for a in 0..2 {
                for b in 0..2 {
                    let wt = w[0][a] * w[1][b];
                    if wt != 0.0 {
                        mass[grid.index(idx[0][a], idx[1][b])] += m * wt;
                    }
                }
            }
        }
    }
    Ok(DensityField::from_solver(
        grid,
        mass.into_iter().map(|m| m / cv).collect(),
    ))
}
