//! Discrete optimal transport between cell-averaged densities.
//!
//! Cells are point masses at their centers. The exact solvers run a network
//! simplex on integer costs `K·|i − j|² + g(i, j)`, where `|i − j|²` is the
//! squared lattice distance and `g` is a small deterministic perturbation
//! (`Σ g` over any cycle stays below `K`). The perturbation selects a single
//! optimal plan among the ties of the quadratic cost, so every solver here is a
//! deterministic function of its input. The projection averages the solutions
//! for `g` and its reversal `2^28 − 1 − g`, which sit at opposite ends of the
//! tied optimal face; a single perturbation would settle every tie the same
//! way step after step and make the crowd drift. Exact solvers require
//! isotropic grids.

mod interpolate;
mod lp;
mod one_d;
mod plan;
mod projection;
pub(crate) mod simplex;
mod sinkhorn;

pub use interpolate::{barycentric_map, displacement_interpolate, optimal_map};
pub use lp::{lp_transport, w2_lp, ExactTransport};
pub use one_d::{w2_cell_average_1d, w2_exact_1d};
pub use plan::{PotentialPair, TransportPlan};
pub use projection::{wasserstein_project, wasserstein_project_with_report, ProjectionReport};
pub use sinkhorn::{default_epsilon, sinkhorn_w2};

use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::Grid;

/// Scale of the squared lattice distance in the integer cost.
pub(crate) const COST_SCALE: i128 = 1 << 64;
const TIE_BITS: u32 = 28;

/// Deterministic perturbation in `[0, 2^28)`, zero on the diagonal.
pub(crate) fn tie_break(i: usize, j: usize) -> i128 {
    if i == j {
        return 0;
    }
    let mut z = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (j as u64).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> (64 - TIE_BITS)) as i128
}

pub(crate) fn exact_cost(grid: &Grid, i: usize, j: usize) -> i128 {
    COST_SCALE * grid.lattice_distance2(i, j) as i128 + tie_break(i, j)
}

/// Which end of the tied optimal face a solve lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tie {
    Forward,
    Reversed,
}

pub(crate) fn oriented_cost(grid: &Grid, i: usize, j: usize, tie: Tie) -> i128 {
    let g = match tie {
        Tie::Forward => tie_break(i, j),
        Tie::Reversed if i == j => 0,
        Tie::Reversed => (1 << TIE_BITS) - 1 - tie_break(i, j),
    };
    COST_SCALE * grid.lattice_distance2(i, j) as i128 + g
}

/// Upper bound on `exact_cost` over the grid.
pub(crate) fn max_exact_cost(grid: &Grid) -> i128 {
    let dx = (grid.nx() - 1) as i128;
    let dy = (grid.ny() - 1) as i128;
    COST_SCALE * (dx * dx + dy * dy) + (1 << TIE_BITS)
}

/// Converts a potential in integer cost units to length² (for `½|x − y|²`).
pub(crate) fn potential_to_f64(grid: &Grid, value: i128) -> f64 {
    let h = grid.spacing(0);
    value as f64 / COST_SCALE as f64 * 0.5 * h * h
}

pub(crate) fn require_exact_grid(grid: &Grid) -> Result<()> {
    if !grid.is_isotropic() {
        return Err(Error::InvalidGrid("exact transport needs equal spacing on both axes".into()));
    }
    Ok(())
}

pub(crate) fn require_same_grid(a: &DensityField, b: &DensityField) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Masses must agree to 1e-9 relative. Returns the factor that rescales `b`
/// onto the mass of `a`.
pub(crate) fn balance_factor(a: &DensityField, b: &DensityField) -> Result<f64> {
    let (ma, mb) = (a.mass(), b.mass());
    if ma <= 0.0 || mb <= 0.0 {
        return Err(Error::DegenerateDensity);
    }
    if (ma - mb).abs() > 1e-9 * ma.max(mb) {
        return Err(Error::invalid(alloc::format!(
            "densities carry different masses ({ma} and {mb})"
        )));
    }
    Ok(ma / mb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_break_range_and_diagonal() {
        for i in 0..50 {
            assert_eq!(tie_break(i, i), 0);
            for j in 0..50 {
                let g = tie_break(i, j);
                assert!((0..1 << TIE_BITS).contains(&g));
            }
        }
        assert_ne!(tie_break(1, 2), tie_break(2, 1));
    }
}
