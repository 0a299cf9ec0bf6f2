use alloc::vec::Vec;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::Grid;
use crate::math;
use crate::operators::{face_dot, gradient, zero_faces, FaceValues};
use crate::preset::VelocityPreset;
use crate::scenario::Order;

/// Smooth test functions with zero normal derivative on the walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Constant,
    /// `cos(kπx/L_x)`.
    CosineX(u32),
    /// `cos(kπy/L_y)`.
    CosineY(u32),
    /// `cos(kπx/L_x) cos(lπy/L_y)`.
    CosineXY(u32, u32),
    /// `x²(3L_x − 2x)/L_x³`, flat at both walls.
    SmoothStepX,
}

impl TestFunction {
    pub fn eval(&self, grid: &Grid, x: [f64; 2]) -> f64 {
        let pi = core::f64::consts::PI;
        let lx = grid.extent(0);
        let ly = grid.extent(1);
        match *self {
            TestFunction::Constant => 1.0,
            TestFunction::CosineX(k) => math::cos(k as f64 * pi * x[0] / lx),
            TestFunction::CosineY(k) => math::cos(k as f64 * pi * x[1] / ly),
            TestFunction::CosineXY(k, l) => math::cos(k as f64 * pi * x[0] / lx) * math::cos(l as f64 * pi * x[1] / ly),
            TestFunction::SmoothStepX => x[0] * x[0] * (3.0 * lx - 2.0 * x[0]) / (lx * lx * lx),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.eval(grid, grid.center(i))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidualEntry {
    pub from: f64,
    pub to: f64,
    pub test: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidualReport {
    pub entries: Vec<WeakResidualEntry>,
    pub max_residual: f64,
}

/// Discrete residual of the weak formulation between consecutive frames:
///
/// `∫φρ_s − ∫φρ_r − ∫_r^s [∫ ρ (u − ∇p)·∇φ − ν ∫ ∇ρ·∇φ] dt`,
///
/// with the time integral by the trapezoidal rule over the two frames and
/// face densities averaged from the adjacent cells.
pub fn weak_residual(traj: &Trajectory, u: &VelocityPreset, tests: &[TestFunction]) -> Result<WeakResidualReport> {
    let grid = traj.grid;
    for (k, f) in traj.frames.iter().enumerate() {
        if f.pressure.is_none() {
            return Err(Error::MissingPressure(k));
        }
    }
    let samples: Vec<Vec<f64>> = tests.iter().map(|t| t.sample(&grid)).collect();
    let grads: Vec<FaceValues> = samples.iter().map(|s| gradient(&grid, s)).collect();
    let nu = match traj.order {
        Order::First => 0.0,
        Order::Second => 1.0,
    };
    let flux = |rho: &DensityField, p: &[f64], time: f64| -> Result<FaceValues> {
        let field = u.sample(&grid, time)?;
        let gp = gradient(&grid, p);
        let gr = gradient(&grid, rho.values());
        let mut out = zero_faces(&grid);
        for axis in 0..grid.dim() {
            for (k, o) in out[axis].iter_mut().enumerate() {
                let (lo, hi) = grid.face_cells(axis, k);
                let rf = 0.5 * (rho.values()[lo] + rho.values()[hi]);
                *o = rf * (field.faces(axis)[k] - gp[axis][k]) - nu * gr[axis][k];
            }
        }
        Ok(out)
    };
    let mut entries = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut prev_flux: Option<FaceValues> = None;
    for w in traj.frames.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let fa = match prev_flux.take() {
            Some(f) => f,
            None => flux(&a.density, a.pressure.as_ref().expect("checked").values(), a.time)?,
        };
        let fb = flux(&b.density, b.pressure.as_ref().expect("checked").values(), b.time)?;
        let dt = b.time - a.time;
        for (ti, (phi, gphi)) in samples.iter().zip(&grads).enumerate() {
            let change = b.density.integrate(phi) - a.density.integrate(phi);
            let work = 0.5 * dt * (face_dot(&grid, &fa, gphi) + face_dot(&grid, &fb, gphi));
            let residual = change - work;
            max_residual = max_residual.max(residual.abs());
            entries.push(WeakResidualEntry {
                from: a.time,
                to: b.time,
                test: ti,
                residual,
            });
        }
        prev_flux = Some(fb);
    }
    Ok(WeakResidualReport {
        entries,
        max_residual,
    })
}
