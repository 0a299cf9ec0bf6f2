//! Numerical tolerances shared by every module.
//!
//! Call sites take a `&Tolerances`; nothing below hard-codes these values.

/// Tolerances and solver limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `|mass − 1|` allowed after constructing a density.
    pub mass: f64,
    /// A density is feasible when `max ρ ≤ 1 + constraint`.
    pub constraint: f64,
    /// Cells with `ρ ≥ 1 − saturation` form the saturated set.
    pub saturation: f64,
    /// Stop the cone projection when the projected gradient norm is below
    /// `cone_stop · (1 + ‖u‖)`.
    pub cone_stop: f64,
    /// Iteration cap of the cone projection.
    pub cone_max_iter: usize,
    /// Relative orthogonality residual accepted by the energy check.
    pub ortho: f64,
    /// Dual feasibility slack accepted on Kantorovich potentials.
    pub duality: f64,
    /// Sinkhorn stops when both marginal errors are below this (L¹).
    pub marginal: f64,
    /// Sinkhorn iteration cap.
    pub sinkhorn_max_iter: usize,
    /// Largest number of (source, target) cell pairs handed to the exact solver.
    pub lp_pair_cap: usize,
    /// Largest CFL number allowed for a transport sub-step.
    pub cfl: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass: 1e-10,
            constraint: 1e-6,
            saturation: 1e-6,
            cone_stop: 1e-8,
            cone_max_iter: 200_000,
            ortho: 1e-6,
            duality: 1e-8,
            marginal: 1e-9,
            sinkhorn_max_iter: 200_000,
            lp_pair_cap: 1 << 20,
            cfl: 0.9,
        }
    }
}
