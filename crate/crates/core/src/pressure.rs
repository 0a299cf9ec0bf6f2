//! Projection of a drift onto the admissible cone.
//!
//! For a feasible density `ρ` and face velocities `u`, the pressure solves
//! `min ½‖u − ∇p‖²` over `p ≥ 0` with `p = 0` off the saturated set
//! `{ρ ≥ 1 − saturation}`. The admissible velocity is `v = u − ∇p`. Because
//! the discrete gradient and divergence are adjoint, the discrete problem has
//! the same optimality conditions as the continuous one:
//! `⟨∇p, v⟩ = 0` and `⟨∇q, v⟩ ≤ 0` for every admissible `q`.
//!
//! Boundary faces carry no gradient, so the pressure satisfies a natural
//! no-flux condition at the walls.
//!
//! The solver alternates projected gradient steps (Barzilai–Borwein length,
//! Armijo backtracking) that change the active set, with conjugate gradients
//! on the current free set for precision.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::field::{DensityField, PressureField, VelocityField};
use crate::grid::Grid;
use crate::math;
use crate::operators::{divergence_into, face_dot, face_norm2, gradient, gradient_into, zero_faces, FaceValues};
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct ConeProjectionResult {
    pub pressure: PressureField,
    /// `v = u − ∇p`.
    pub velocity: VelocityField,
    /// `∇p` on faces.
    pub pressure_gradient: FaceValues,
    /// `|⟨∇p, v⟩| / ‖u‖²` (0 when `u = 0`).
    pub orthogonality: f64,
    /// `max_q ⟨∇q, v⟩ / (‖q‖_{H¹}‖u‖)` over the canonical and eight sampled
    /// witnesses; nonpositive up to solver tolerance.
    pub cone_residual: f64,
    /// `max p · max(0, 1 − ρ − saturation)`.
    pub complementarity: f64,
    /// Weighted norm of the projected gradient at exit.
    pub projected_gradient: f64,
    pub iterations: usize,
    /// Projected gradient below `cone_stop · (1 + ‖u‖)` and both optimality
    /// residuals below `ortho`.
    pub converged: bool,
}

/// Cells with `ρ ≥ 1 − saturation`.
pub fn saturated_set(rho: &DensityField, tol: &Tolerances) -> Vec<bool> {
    rho.values().iter().map(|&r| r >= 1.0 - tol.saturation).collect()
}

/// Projects `u` onto the admissible cone of `ρ`.
///
/// Hitting the iteration cap is not an error: the result carries
/// `converged = false` and the residuals reached.
pub fn admissible_project(rho: &DensityField, u: &VelocityField, tol: &Tolerances) -> Result<ConeProjectionResult> {
    let grid = *rho.grid();
    if u.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    if !rho.is_feasible(tol.constraint) {
        return Err(Error::invalid(alloc::format!(
            "cone projection needs a feasible density (max {})",
            rho.max()
        )));
    }
    let uf: FaceValues = [u.faces(0).to_vec(), u.faces(1).to_vec()];
    if uf.iter().any(|f| f.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("velocity"));
    }
    let sat = saturated_set(rho, tol);
    let norm_u = math::sqrt(face_norm2(&grid, &uf));
    let (p, iterations, pg) = if sat.iter().any(|s| *s) && norm_u > 0.0 {
        solve(&grid, &sat, &uf, norm_u, tol)
    } else {
        (vec![0.0; grid.len()], 0, 0.0)
    };
    let gp = gradient(&grid, &p);
    let mut v = zero_faces(&grid);
    for axis in 0..2 {
        for (k, out) in v[axis].iter_mut().enumerate() {
            *out = uf[axis][k] - gp[axis][k];
        }
    }
    let u2 = norm_u * norm_u;
    let orthogonality = if u2 > 0.0 { face_dot(&grid, &gp, &v).abs() / u2 } else { 0.0 };
    let pressure = PressureField::from_values(grid, p)?;
    let complementarity = pressure.complementarity(rho, tol.saturation);
    let mut witnesses = canonical_witnesses(rho, &pressure, tol);
    witnesses.extend(
        sample_pressure_test_functions(rho, 8, 0, tol)
            .into_iter()
            .map(|q| q.values().to_vec()),
    );
    let cone_residual = cone_residual(&grid, &witnesses, &v, norm_u);
    let converged = pg <= tol.cone_stop * (1.0 + norm_u)
        && orthogonality <= tol.ortho
        && cone_residual <= tol.ortho;
    let velocity = VelocityField::from_faces(grid, u.time(), v)?;
    Ok(ConeProjectionResult {
        pressure,
        velocity,
        pressure_gradient: gp,
        orthogonality,
        cone_residual,
        complementarity,
        projected_gradient: pg,
        iterations,
        converged,
    })
}

struct Quadratic<'a> {
    grid: &'a Grid,
    sat: &'a [bool],
    u: &'a FaceValues,
    faces: FaceValues,
    cells: Vec<f64>,
}

impl Quadratic<'_> {
    /// `½‖∇p − u‖²` (unweighted) and the gradient `∇ᵀ(∇p − u)` on the
    /// saturated set.
    fn eval(&mut self, p: &[f64], grad: &mut [f64]) -> f64 {
        gradient_into(self.grid, p, &mut self.faces);
        let mut f = 0.0;
        for axis in 0..2 {
            for (r, &u) in self.faces[axis].iter_mut().zip(&self.u[axis]) {
                *r -= u;
                f += *r * *r;
            }
        }
        divergence_into(self.grid, &self.faces, &mut self.cells);
        for (c, g) in grad.iter_mut().enumerate() {
            *g = if self.sat[c] { -self.cells[c] } else { 0.0 };
        }
        0.5 * f
    }

    /// `∇ᵀ∇ d` on the saturated set.
    fn hessian(&mut self, d: &[f64], out: &mut [f64]) {
        gradient_into(self.grid, d, &mut self.faces);
        divergence_into(self.grid, &self.faces, &mut self.cells);
        for (c, o) in out.iter_mut().enumerate() {
            *o = if self.sat[c] { -self.cells[c] } else { 0.0 };
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn solve(grid: &Grid, sat: &[bool], u: &FaceValues, norm_u: f64, tol: &Tolerances) -> (Vec<f64>, usize, f64) {
    let n = grid.len();
    let cv = grid.cell_volume();
    let stop = tol.cone_stop * (1.0 + norm_u);
    let mut q = Quadratic {
        grid,
        sat,
        u,
        faces: zero_faces(grid),
        cells: vec![0.0; n],
    };
    let hmin = (0..grid.dim()).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    let alpha_min = hmin * hmin / (4.0 * grid.dim() as f64);
    let mut alpha = alpha_min;
    let mut p = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut iters = 0;
    let mut pg_norm;
    loop {
        let f0 = q.eval(&p, &mut g);
        pg_norm = projected_gradient_norm(sat, &p, &g, cv);
        if pg_norm <= stop || iters >= tol.cone_max_iter {
            break;
        }
        iters += 1;

        // Projected gradient step.
        let mut step = alpha;
        loop {
            for c in 0..n {
                trial[c] = if sat[c] { (p[c] - step * g[c]).max(0.0) } else { 0.0 };
            }
            let f1 = q.eval(&trial, &mut g_trial);
            let decrease: f64 = (0..n).map(|c| g[c] * (trial[c] - p[c])).sum();
            if f1 <= f0 + 1e-4 * decrease || step <= alpha_min * 1e-3 {
                break;
            }
            step *= 0.5;
        }
        let mut ss = 0.0;
        let mut sy = 0.0;
        for c in 0..n {
            let s = trial[c] - p[c];
            ss += s * s;
            sy += s * (g_trial[c] - g[c]);
        }
        alpha = if sy > 0.0 { (ss / sy).max(alpha_min) } else { alpha_min * 1e3 };
        core::mem::swap(&mut p, &mut trial);

        // Conjugate gradients on the free set.
        iters += conjugate_gradients(&mut q, &mut p, stop, cv, tol.cone_max_iter.saturating_sub(iters));
    }
    (p, iters, pg_norm)
}

fn projected_gradient_norm(sat: &[bool], p: &[f64], g: &[f64], cv: f64) -> f64 {
    let mut s = 0.0;
    for c in 0..p.len() {
        if sat[c] {
            let v = if p[c] > 0.0 { g[c] } else { g[c].min(0.0) };
            s += v * v;
        }
    }
    math::sqrt(s * cv)
}

fn conjugate_gradients(q: &mut Quadratic, p: &mut [f64], stop: f64, cv: f64, budget: usize) -> usize {
    let n = p.len();
    let free: Vec<bool> = p.iter().map(|&x| x > 0.0).collect();
    if !free.iter().any(|f| *f) {
        return 0;
    }
    let mut r = vec![0.0; n];
    q.eval(p, &mut r);
    for c in 0..n {
        r[c] = if free[c] { -r[c] } else { 0.0 };
    }
    let mut d = r.clone();
    let mut hd = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut k = 0;
    while k < budget {
        if math::sqrt(rr * cv) <= 0.1 * stop {
            break;
        }
        q.hessian(&d, &mut hd);
        for c in 0..n {
            if !free[c] {
                hd[c] = 0.0;
            }
        }
        let dhd = dot(&d, &hd);
        if dhd <= 0.0 {
            break;
        }
        let step = rr / dhd;
        let mut max_step = f64::INFINITY;
        for c in 0..n {
            if d[c] < 0.0 {
                max_step = max_step.min(-p[c] / d[c]);
            }
        }
        k += 1;
        if step >= max_step {
            // Move to the bound and land the blocking variables exactly on it.
            for c in 0..n {
                if free[c] {
                    p[c] += max_step * d[c];
                    if d[c] < 0.0 && p[c] <= -d[c] * max_step * 1e-12 {
                        p[c] = 0.0;
                    }
                }
            }
            break;
        }
        for c in 0..n {
            p[c] += step * d[c];
            r[c] -= step * hd[c];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for c in 0..n {
            d[c] = r[c] + beta * d[c];
        }
    }
    k
}

/// `max_q ⟨∇q, v⟩ / (‖q‖_{H¹}‖u‖)`; `−∞` for an empty witness list.
pub fn cone_residual(grid: &Grid, witnesses: &[Vec<f64>], v: &FaceValues, norm_u: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for q in witnesses {
        let gq = gradient(grid, q);
        let h1 = math::sqrt(q.iter().map(|x| x * x).sum::<f64>() * grid.cell_volume() + face_norm2(grid, &gq));
        if h1 == 0.0 || norm_u == 0.0 {
            worst = worst.max(0.0);
            continue;
        }
        worst = worst.max(face_dot(grid, &gq, v) / (h1 * norm_u));
    }
    worst
}

/// `p` itself plus a smoothed indicator of every connected saturated component.
pub fn canonical_witnesses(rho: &DensityField, p: &PressureField, tol: &Tolerances) -> Vec<Vec<f64>> {
    let grid = *rho.grid();
    let sat = saturated_set(rho, tol);
    let mut out = vec![p.values().to_vec()];
    let mut label = vec![usize::MAX; grid.len()];
    let mut components = 0;
    for start in 0..grid.len() {
        if !sat[start] || label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = components;
        while let Some(c) = stack.pop() {
            for nb in cell_neighbours(&grid, c).into_iter().flatten() {
                if sat[nb] && label[nb] == usize::MAX {
                    label[nb] = components;
                    stack.push(nb);
                }
            }
        }
        components += 1;
    }
    for k in 0..components {
        let mut q: Vec<f64> = label.iter().map(|&l| (l == k) as u8 as f64).collect();
        smooth(&grid, &sat, &mut q, 3);
        out.push(q);
    }
    out
}

/// Pseudo-random nonnegative fields supported on the saturated set, smoothed
/// by three neighbour-averaging passes. Empty when nothing is saturated.
pub fn sample_pressure_test_functions(
    rho: &DensityField,
    count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Vec<PressureField> {
    let grid = *rho.grid();
    let sat = saturated_set(rho, tol);
    if !sat.iter().any(|s| *s) {
        return Vec::new();
    }
    let mut rng = Rng::seeded(seed);
    (0..count)
        .map(|_| {
            let mut q: Vec<f64> = sat.iter().map(|&s| if s { rng.uniform() } else { 0.0 }).collect();
            smooth(&grid, &sat, &mut q, 3);
            PressureField::from_values(grid, q).expect("nonnegative by construction")
        })
        .collect()
}

fn smooth(grid: &Grid, sat: &[bool], q: &mut [f64], passes: usize) {
    let mut next = q.to_vec();
    for _ in 0..passes {
        for c in 0..grid.len() {
            if !sat[c] {
                next[c] = 0.0;
                continue;
            }
            let mut s = q[c];
            let mut k = 1.0;
            for nb in cell_neighbours(grid, c).into_iter().flatten() {
                s += q[nb];
                k += 1.0;
            }
            next[c] = s / k;
        }
        q.copy_from_slice(&next);
    }
}

fn cell_neighbours(grid: &Grid, c: usize) -> [Option<usize>; 4] {
    let (ix, iy) = grid.coords(c);
    [
        (ix > 0).then(|| grid.index(ix - 1, iy)),
        (ix + 1 < grid.nx()).then(|| grid.index(ix + 1, iy)),
        (grid.dim() == 2 && iy > 0).then(|| grid.index(ix, iy - 1)),
        (grid.dim() == 2 && iy + 1 < grid.ny()).then(|| grid.index(ix, iy + 1)),
    ]
}

/// Pythagoras split and norm inequalities of a cone projection.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub norm_u2: f64,
    pub norm_grad_p2: f64,
    pub norm_v2: f64,
    /// `|‖u‖² − ‖∇p‖² − ‖v‖²| / ‖u‖²` (absolute when `u = 0`).
    pub split_residual: f64,
    pub split_ok: bool,
    pub grad_p_bounded: bool,
    pub v_bounded: bool,
    pub complementarity: f64,
}

pub fn energy_check(result: &ConeProjectionResult, u: &VelocityField, tol: &Tolerances) -> EnergyReport {
    let grid = *u.grid();
    let uf: FaceValues = [u.faces(0).to_vec(), u.faces(1).to_vec()];
    let v: FaceValues = [result.velocity.faces(0).to_vec(), result.velocity.faces(1).to_vec()];
    let norm_u2 = face_norm2(&grid, &uf);
    let norm_grad_p2 = face_norm2(&grid, &result.pressure_gradient);
    let norm_v2 = face_norm2(&grid, &v);
    let diff = (norm_u2 - norm_grad_p2 - norm_v2).abs();
    let split_residual = if norm_u2 > 0.0 { diff / norm_u2 } else { diff };
    let slack = 1e-12 * norm_u2;
    EnergyReport {
        norm_u2,
        norm_grad_p2,
        norm_v2,
        split_residual,
        split_ok: split_residual <= tol.ortho,
        grad_p_bounded: norm_grad_p2 <= norm_u2 + slack,
        v_bounded: norm_v2 <= norm_u2 + slack,
        complementarity: result.complementarity,
    }
}
