use alloc::vec;
use alloc::vec::Vec;

use super::simplex::NetworkSimplex;
use super::{
    balance_factor, exact_cost, max_exact_cost, potential_to_f64, require_exact_grid,
    require_same_grid, PotentialPair, TransportPlan,
};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::Grid;
use crate::math;

/// Optimal cost `W₂²`, plan and potentials of one exact solve.
#[derive(Debug, Clone)]
pub struct ExactTransport {
    /// `Σ γ_ij |x_i − y_j|²`.
    pub cost: f64,
    pub plan: TransportPlan,
    pub potentials: PotentialPair,
}

impl ExactTransport {
    pub fn w2(&self) -> f64 {
        math::sqrt(self.cost.max(0.0))
    }

    /// `cost − 2(Σφρ₁ + Σψρ₂)`; nonnegative up to roundoff.
    pub fn duality_gap(&self, a: &DensityField, b: &DensityField) -> f64 {
        self.cost - 2.0 * self.potentials.dual_value(a, b)
    }
}

/// Exact optimal transport between two densities on the same isotropic grid.
///
/// The bipartite network has one arc per (source support cell, target support
/// cell) pair; above `tol.lp_pair_cap` pairs the call fails with
/// [`Error::TooLarge`]. Potentials are extended to every cell by c-transforms,
/// so `φ(x) + ψ(y) ≤ ½|x − y|²` holds for all pairs of cell centers.
pub fn lp_transport(a: &DensityField, b: &DensityField, tol: &Tolerances) -> Result<ExactTransport> {
    require_same_grid(a, b)?;
    let grid = *a.grid();
    require_exact_grid(&grid)?;
    let scale_b = balance_factor(a, b)?;
    let s1 = a.support();
    let s2 = b.support();
    let pairs = s1.len() * s2.len();
    if pairs > tol.lp_pair_cap {
        return Err(Error::TooLarge {
            pairs,
            cap: tol.lp_pair_cap,
        });
    }
    let (n1, n2) = (s1.len(), s2.len());
    let mut supply = Vec::with_capacity(n1 + n2);
    supply.extend(s1.iter().map(|&i| a.values()[i]));
    supply.extend(s2.iter().map(|&j| -b.values()[j] * scale_b));
    let mut ns = NetworkSimplex::new(supply, max_exact_cost(&grid))?;
    for (u, &i) in s1.iter().enumerate() {
        for (v, &j) in s2.iter().enumerate() {
            ns.add_arc(u, n1 + v, f64::INFINITY, exact_cost(&grid, i, j));
        }
    }
    ns.solve()?;
    ns.require_feasible()?;

    let cv = grid.cell_volume();
    let mut entries = Vec::new();
    let first = ns.first_real_arc();
    for k in 0..ns.arc_count() {
        let f = ns.flow(first + k);
        if f > 0.0 {
            let (u, v) = ns.endpoints(first + k);
            entries.push((s1[u], s2[v - n1], f * cv));
        }
    }
    let plan = TransportPlan::new(grid, grid, entries)?;
    let cost = plan.cost();

    // y = −π are the network duals; shift so the first source sits at zero.
    let reference = -ns.potential(0);
    let psi_support: Vec<f64> = (0..n2)
        .map(|v| potential_to_f64(&grid, ns.potential(n1 + v) + reference))
        .collect();
    let potentials = c_transform_pair(&grid, &s2, &psi_support);
    Ok(ExactTransport {
        cost,
        plan,
        potentials,
    })
}

/// `W₂` from the exact solver.
pub fn w2_lp(a: &DensityField, b: &DensityField, tol: &Tolerances) -> Result<f64> {
    Ok(lp_transport(a, b, tol)?.w2())
}

/// `φ = ψ^c` over all cells from `ψ` on the target support, then `ψ = φ^c`
/// over all cells.
fn c_transform_pair(grid: &Grid, support: &[usize], psi_support: &[f64]) -> PotentialPair {
    let n = grid.len();
    let h = grid.spacing(0);
    let half_h2 = 0.5 * h * h;
    let cost = |i: usize, j: usize| half_h2 * grid.lattice_distance2(i, j) as f64;
    let phi: Vec<f64> = (0..n)
        .map(|i| {
            support
                .iter()
                .zip(psi_support)
                .map(|(&j, &p)| cost(i, j) - p)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut psi = vec![0.0; n];
    for (j, out) in psi.iter_mut().enumerate() {
        *out = (0..n).map(|i| cost(i, j) - phi[i]).fold(f64::INFINITY, f64::min);
    }
    PotentialPair { phi, psi }
}
