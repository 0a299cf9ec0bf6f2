use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::Grid;

/// Sparse coupling: `(source cell, target cell, mass)` with every mass > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    source: Grid,
    target: Grid,
    entries: Vec<(usize, usize, f64)>,
}

impl TransportPlan {
    pub fn new(source: Grid, target: Grid, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, m) in &entries {
            if i >= source.len() || j >= target.len() {
                return Err(Error::invalid("plan entry outside the grid"));
            }
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::invalid("plan masses must be positive and finite"));
            }
        }
        Ok(Self {
            source,
            target,
            entries,
        })
    }

    pub fn source_grid(&self) -> &Grid {
        &self.source
    }

    pub fn target_grid(&self) -> &Grid {
        &self.target
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// `Σ mass · |x_i − y_j|²`.
    pub fn cost(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, m)| {
                let x = self.source.center(i);
                let y = self.target.center(j);
                m * ((x[0] - y[0]) * (x[0] - y[0]) + (x[1] - y[1]) * (x[1] - y[1]))
            })
            .sum()
    }

    /// Mass leaving each source cell.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.source.len()];
        for &(i, _, m) in &self.entries {
            out[i] += m;
        }
        out
    }

    /// Mass arriving in each target cell.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.target.len()];
        for &(_, j, m) in &self.entries {
            out[j] += m;
        }
        out
    }

    /// Second marginal as a density on the target grid.
    pub fn second_marginal(&self) -> DensityField {
        let cv = self.target.cell_volume();
        let values = self.column_sums().into_iter().map(|m| m / cv).collect();
        DensityField::from_solver(self.target, values)
    }

    /// Largest deviation of the row and column sums from the cell masses of
    /// `a` and `b`.
    pub fn marginal_error(&self, a: &DensityField, b: &DensityField) -> f64 {
        let ca = a.grid().cell_volume();
        let cb = b.grid().cell_volume();
        let rows = self
            .row_sums()
            .iter()
            .zip(a.values())
            .map(|(r, v)| (r - v * ca).abs())
            .fold(0.0, f64::max);
        let cols = self
            .column_sums()
            .iter()
            .zip(b.values())
            .map(|(c, v)| (c - v * cb).abs())
            .fold(0.0, f64::max);
        rows.max(cols)
    }
}

/// Kantorovich potentials for the cost `½|x − y|²`, defined on every cell of
/// the source (`phi`) and target (`psi`) grids.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl PotentialPair {
    /// `max_{i,j} φ_i + ψ_j − ½|x_i − y_j|²` over all cell pairs of `grid`.
    pub fn max_violation(&self, grid: &Grid) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                let v = self.phi[i] + self.psi[j] - 0.5 * grid.distance2(i, j);
                worst = worst.max(v);
            }
        }
        worst
    }

    /// `Σφρ₁ + Σψρ₂` (cell-volume weighted).
    pub fn dual_value(&self, a: &DensityField, b: &DensityField) -> f64 {
        a.integrate(&self.phi) + b.integrate(&self.psi)
    }
}
