use alloc::vec::Vec;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::field::{DensityField, PressureField};
use crate::grid::Grid;
use crate::math;
use crate::operators::cell_gradient;
use crate::preset::Bump;
use crate::rng::Rng;
use crate::transport::{displacement_interpolate, lp_transport, wasserstein_project, ExactTransport};

/// Steps of the one-sided difference quotients.
pub const DERIVATIVE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    /// `∫ ∇φ·∇p dρ₀`.
    pub integral: f64,
    /// `‖∇p‖_{L²(Ω)}`.
    pub grad_p_norm: f64,
    /// `‖∇φ‖_{L²(Ω)}`.
    pub grad_phi_norm: f64,
    /// Cell size.
    pub h: f64,
}

impl PositivityReport {
    /// `integral / (h ‖∇p‖ ‖∇φ‖)`: the constant a band `−C h ‖∇p‖‖∇φ‖`
    /// must have to contain this instance (0 for nonnegative integrals).
    pub fn band_constant(&self) -> f64 {
        let scale = self.h * self.grad_p_norm * self.grad_phi_norm;
        if self.integral >= 0.0 || scale == 0.0 {
            0.0
        } else {
            -self.integral / scale
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicDerivativeReport {
    /// Richardson-extrapolated `d/dt ∫ p dμ_t` at `t = 0`.
    pub lhs: f64,
    /// `−∫ ∇φ·∇p dρ₀`.
    pub rhs: f64,
    pub gap: f64,
}

fn check_inputs(rho0: &DensityField, rho1: &DensityField, p: &PressureField, tol: &Tolerances) -> Result<()> {
    if rho0.grid() != rho1.grid() || p.grid() != rho0.grid() {
        return Err(Error::GridMismatch);
    }
    if !rho0.is_feasible(tol.constraint) || !rho1.is_feasible(tol.constraint) {
        return Err(Error::invalid("both densities must be feasible"));
    }
    Ok(())
}

fn positivity_from(rho0: &DensityField, p: &PressureField, transport: &ExactTransport) -> PositivityReport {
    let grid = *rho0.grid();
    let cv = grid.cell_volume();
    let gphi = cell_gradient(&grid, &transport.potentials.phi);
    let gp = cell_gradient(&grid, p.values());
    let mut integral = 0.0;
    let mut np = 0.0;
    let mut nphi = 0.0;
    for c in 0..grid.len() {
        integral += rho0.values()[c] * (gphi[c][0] * gp[c][0] + gphi[c][1] * gp[c][1]);
        np += gp[c][0] * gp[c][0] + gp[c][1] * gp[c][1];
        nphi += gphi[c][0] * gphi[c][0] + gphi[c][1] * gphi[c][1];
    }
    PositivityReport {
        integral: integral * cv,
        grad_p_norm: math::sqrt(np * cv),
        grad_phi_norm: math::sqrt(nphi * cv),
        h: grid.spacing(0),
    }
}

/// `∫ ∇φ·∇p dρ₀` with `φ` the Kantorovich potential from `ρ₀` to `ρ₁`
/// (central differences of the exact dual potential and of `p`).
pub fn verify_positivity(
    rho0: &DensityField,
    rho1: &DensityField,
    p: &PressureField,
    tol: &Tolerances,
) -> Result<PositivityReport> {
    check_inputs(rho0, rho1, p, tol)?;
    let transport = lp_transport(rho0, rho1, tol)?;
    Ok(positivity_from(rho0, p, &transport))
}

/// Compares the derivative of `t ↦ ∫ p dμ_t` at `t = 0` along the
/// displacement interpolation with `−∫ ∇φ·∇p dρ₀`.
///
/// The left side is extrapolated from forward differences at
/// [`DERIVATIVE_STEPS`]: `(8D(t/4) − 6D(t/2) + D(t)) / 3`.
pub fn verify_geodesic_derivative(
    rho0: &DensityField,
    rho1: &DensityField,
    p: &PressureField,
    tol: &Tolerances,
) -> Result<GeodesicDerivativeReport> {
    check_inputs(rho0, rho1, p, tol)?;
    let transport = lp_transport(rho0, rho1, tol)?;
    let base = rho0.integrate(p.values());
    let mut quotients = [0.0; 3];
    for (q, &t) in quotients.iter_mut().zip(&DERIVATIVE_STEPS) {
        let mu = displacement_interpolate(rho0, &transport.plan, t)?;
        *q = (mu.integrate(p.values()) - base) / t;
    }
    let lhs = (8.0 * quotients[2] - 6.0 * quotients[1] + quotients[0]) / 3.0;
    let rhs = -positivity_from(rho0, p, &transport).integral;
    Ok(GeodesicDerivativeReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// Unit-mass density `∝ U^k` with `U` uniform per cell; larger `k` gives
/// taller, sparser peaks.
pub fn random_density(grid: &Grid, seed: u64, roughness: f64) -> Result<DensityField> {
    let mut rng = Rng::seeded(seed);
    let raw: Vec<f64> = (0..grid.len()).map(|_| libm::pow(rng.uniform(), roughness)).collect();
    DensityField::normalized(*grid, raw)
}

/// Unit-mass sum of two or three raised-cosine bumps with random centers,
/// radii and weights, projected onto `{ρ ≤ 1}`. Unlike [`random_density`],
/// the family is smooth, so refinements of the same seed converge.
pub fn random_smooth_density(grid: &Grid, seed: u64) -> Result<DensityField> {
    let mut rng = Rng::seeded(seed);
    let dim = grid.dim();
    let short = if dim == 2 { grid.extent(0).min(grid.extent(1)) } else { grid.extent(0) };
    let count = 2 + rng.below(2);
    let bumps: Vec<Bump> = (0..count)
        .map(|_| {
            let mut center = [0.0; 2];
            for (axis, c) in center.iter_mut().enumerate().take(dim) {
                *c = rng.range(0.25, 0.75) * grid.extent(axis);
            }
            Bump {
                center,
                radius: rng.range(0.15, 0.35) * short,
                weight: rng.range(0.3, 1.0),
            }
        })
        .collect();
    let raw: Vec<f64> = (0..grid.len())
        .map(|i| bumps.iter().map(|b| bump_value(b, dim, grid.center(i))).sum())
        .collect();
    wasserstein_project(&DensityField::normalized(*grid, raw)?)
}

fn bump_value(b: &Bump, dim: usize, x: [f64; 2]) -> f64 {
    let mut r2 = 0.0;
    for axis in 0..dim {
        r2 += (x[axis] - b.center[axis]) * (x[axis] - b.center[axis]);
    }
    let r = math::sqrt(r2);
    if r >= b.radius {
        0.0
    } else {
        b.weight * 0.5 * (1.0 + math::cos(core::f64::consts::PI * r / b.radius))
    }
}

/// Smooth nonnegative field `1 + Σ a_k cos(k π x/L_x + θ_k) cos(l π y/L_y)`
/// with `Σ|a_k| < 1`.
pub fn random_smooth_pressure(grid: &Grid, seed: u64) -> Result<PressureField> {
    let mut rng = Rng::seeded(seed);
    let pi = core::f64::consts::PI;
    let terms: Vec<(f64, f64, f64, f64)> = (1..=3)
        .map(|k| {
            let l = if grid.dim() == 2 { rng.below(3) as f64 } else { 0.0 };
            (rng.range(-0.3, 0.3), k as f64, l, rng.range(0.0, 2.0 * pi))
        })
        .collect();
    let (lx, ly) = (grid.extent(0), grid.extent(1));
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.center(i);
            1.0 + terms
                .iter()
                .map(|&(a, k, l, theta)| a * math::cos(k * pi * x[0] / lx + theta) * math::cos(l * pi * x[1] / ly))
                .sum::<f64>()
        })
        .collect();
    PressureField::from_values(*grid, values)
}

/// Projection of a random density, so saturated cells are likely.
pub fn random_feasible_density(grid: &Grid, seed: u64, roughness: f64) -> Result<DensityField> {
    wasserstein_project(&random_density(grid, seed, roughness)?)
}
