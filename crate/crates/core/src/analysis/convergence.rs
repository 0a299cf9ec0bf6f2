//! Self-convergence under simultaneous halving of `h` and `τ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{l1_distance, DensityField};
use crate::grid::Grid;
use crate::preset::{DensityPreset, VelocityPreset};
use crate::scenario::Scenario;

/// Default factor by which successive terminal gaps must shrink.
pub const CONVERGENCE_RATIO: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Cells per axis at each level.
    pub cells: Vec<usize>,
    pub taus: Vec<f64>,
    /// `gaps[k] = ‖R ρ_{k+1}(T) − ρ_k(T)‖₁` on the grid of level `k`, where
    /// `R` averages children into their parent cell.
    pub gaps: Vec<f64>,
    /// `gaps[k] / gaps[k+1]`.
    pub ratios: Vec<f64>,
    pub required_ratio: f64,
    /// `max_k (required / ratio_k − 1)`; nonpositive when every ratio passes.
    pub max_slack: f64,
    pub verdict: bool,
}

/// The scenario and `levels − 1` refinements, each halving `h` and `τ` and
/// doubling `frame_every` so frames stay at the same times.
pub fn refinement_levels(base: &Scenario, levels: usize) -> Result<Vec<Scenario>> {
    if levels < 3 {
        return Err(Error::invalid("a convergence study needs at least three levels"));
    }
    if matches!(base.initial, DensityPreset::Table(_) | DensityPreset::Noise)
        || matches!(base.velocity, VelocityPreset::Table(_))
    {
        return Err(Error::invalid("per-cell presets have no refinement"));
    }
    let mut out = Vec::with_capacity(levels);
    let mut s = base.clone();
    for _ in 0..levels {
        out.push(s.clone());
        s.grid = s.grid.refined()?;
        s.tau *= 0.5;
        s.frame_every *= 2;
    }
    Ok(out)
}

/// Averages a density on `coarse.refined()` down to `coarse`.
pub fn restrict(fine: &DensityField, coarse: &Grid) -> Result<DensityField> {
    if fine.grid() != &coarse.refined()? {
        return Err(Error::GridMismatch);
    }
    let f = fine.grid();
    let mut out = alloc::vec![0.0; coarse.len()];
    let children = if coarse.dim() == 2 { 4.0 } else { 2.0 };
    for i in 0..f.len() {
        let (x, y) = f.coords(i);
        out[coarse.index(x / 2, y / 2)] += fine.values()[i] / children;
    }
    DensityField::from_values(*coarse, out)
}

/// Terminal gaps between successive levels and their ratios.
pub fn convergence_report(finals: &[DensityField], taus: &[f64], required_ratio: f64) -> Result<ConvergenceReport> {
    if finals.len() < 3 || finals.len() != taus.len() {
        return Err(Error::invalid("need at least three levels with one step each"));
    }
    let gaps = finals
        .windows(2)
        .map(|w| l1_distance(&restrict(&w[1], w[0].grid())?, &w[0]))
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = gaps
        .windows(2)
        .map(|g| if g[1] > 0.0 { g[0] / g[1] } else { f64::INFINITY })
        .collect();
    let max_slack = ratios
        .iter()
        .map(|r| required_ratio / r - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ConvergenceReport {
        cells: finals.iter().map(|f| f.grid().nx()).collect(),
        taus: taus.to_vec(),
        verdict: ratios.iter().all(|r| *r >= required_ratio),
        gaps,
        ratios,
        required_ratio,
        max_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_keeps_mass_and_averages() {
        let c = Grid::rect([2.0, 2.0], [3, 3]).unwrap();
        let f = c.refined().unwrap();
        let values: alloc::vec::Vec<f64> = (0..f.len()).map(|i| (i % 7) as f64 / 7.0).collect();
        let fine = DensityField::from_values(f, values).unwrap();
        let r = restrict(&fine, &c).unwrap();
        assert!((r.mass() - fine.mass()).abs() < 1e-14);
        let child = |x: usize, y: usize| fine.values()[f.index(x, y)];
        let expected = 0.25 * (child(2, 2) + child(3, 2) + child(2, 3) + child(3, 3));
        assert!((r.values()[c.index(1, 1)] - expected).abs() < 1e-15);
    }

    #[test]
    fn geometric_gaps_give_their_ratio() {
        let grids: alloc::vec::Vec<Grid> = [8, 16, 32].iter().map(|&n| Grid::line(2.0, n).unwrap()).collect();
        // Constant fields: every gap is zero and the ratios are infinite.
        let finals: alloc::vec::Vec<DensityField> = grids.iter().map(|g| DensityField::uniform(*g)).collect();
        let r = convergence_report(&finals, &[0.1, 0.05, 0.025], CONVERGENCE_RATIO).unwrap();
        assert!(r.verdict);
        assert_eq!(r.gaps, alloc::vec![0.0, 0.0]);
    }
}
