//! Closed-form initial densities and spontaneous drifts.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{DensityField, VelocityField};
use crate::grid::Grid;
use crate::math;
use crate::rng::Rng;

/// A smooth compactly supported bump `w · ½(1 + cos(π r / R))` for `r < R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
    pub weight: f64,
}

impl Bump {
    fn eval(&self, dim: usize, x: [f64; 2]) -> f64 {
        let mut r2 = 0.0;
        for axis in 0..dim {
            let d = x[axis] - self.center[axis];
            r2 += d * d;
        }
        let r = math::sqrt(r2);
        if r >= self.radius {
            0.0
        } else {
            self.weight * 0.5 * (1.0 + math::cos(core::f64::consts::PI * r / self.radius))
        }
    }
}

/// Initial density shapes. Every preset is normalized to unit mass by
/// [`make_density`].
#[derive(Debug, Clone, PartialEq)]
pub enum DensityPreset {
    /// Constant on Ω.
    Uniform,
    /// Constant on the box `[lo, hi]`, exact cell-overlap fractions at the edges.
    /// Also known as the indicator preset.
    Box { lo: [f64; 2], hi: [f64; 2] },
    /// Raised-cosine bump sampled at cell centers.
    Bump(Bump),
    /// Sum of two bumps.
    TwoBumps(Bump, Bump),
    /// Raw per-cell values.
    Table(Vec<f64>),
    /// Independent uniform draws in `[0, 1)` per cell from the scenario seed.
    Noise,
}

/// Evaluates `preset` on `grid` and normalizes to unit mass.
///
/// Feasibility (`ρ ≤ 1`) is not enforced here.
pub fn make_density(grid: &Grid, preset: &DensityPreset, seed: u64) -> Result<DensityField> {
    let n = grid.len();
    let raw: Vec<f64> = match preset {
        DensityPreset::Uniform => return Ok(DensityField::uniform(*grid)),
        DensityPreset::Box { lo, hi } => (0..n).map(|i| box_fraction(grid, i, *lo, *hi)).collect(),
        DensityPreset::Bump(b) => (0..n).map(|i| b.eval(grid.dim(), grid.center(i))).collect(),
        DensityPreset::TwoBumps(a, b) => (0..n)
            .map(|i| a.eval(grid.dim(), grid.center(i)) + b.eval(grid.dim(), grid.center(i)))
            .collect(),
        DensityPreset::Table(values) => {
            if values.len() != n {
                return Err(Error::invalid(format!(
                    "table has {} entries for {} cells",
                    values.len(),
                    n
                )));
            }
            values.clone()
        }
        DensityPreset::Noise => {
            let mut rng = Rng::seeded(seed);
            (0..n).map(|_| rng.uniform()).collect()
        }
    };
    DensityField::normalized(*grid, raw)
}

/// Fraction of cell `i` covered by the box `[lo, hi]`.
fn box_fraction(grid: &Grid, i: usize, lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let c = grid.center(i);
    let mut frac = 1.0;
    for axis in 0..grid.dim() {
        let h = grid.spacing(axis);
        let a = c[axis] - 0.5 * h;
        let b = c[axis] + 0.5 * h;
        let overlap = (b.min(hi[axis]) - a.max(lo[axis])).max(0.0);
        frac *= overlap / h;
    }
    frac
}

/// Spontaneous velocity fields `u_t(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityPreset {
    Zero,
    Constant([f64; 2]),
    /// `u = −k (x − x₀)`, the negative gradient of `D = ½ k |x − x₀|²`.
    PotentialWell { center: [f64; 2], strength: f64 },
    /// `u = ω (−(y − c_y), x − c_x)`.
    Rotation { center: [f64; 2], omega: f64 },
    /// x-component piecewise constant on `[b_k, b_{k+1})`; `values` has one more
    /// entry than `breaks`. The y-component is zero.
    PiecewiseX { breaks: Vec<f64>, values: Vec<f64> },
    /// Per-cell vectors; faces average neighbours.
    Table(Vec<[f64; 2]>),
}

impl VelocityPreset {
    pub fn validate(&self) -> Result<()> {
        match self {
            VelocityPreset::PiecewiseX { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::invalid("piecewise drift needs len(values) = len(breaks) + 1"));
                }
                if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid("piecewise drift breaks must increase"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Pointwise evaluation. Panics for [`VelocityPreset::Table`], which has no
    /// closed form; use [`VelocityPreset::sample`].
    pub fn eval(&self, _t: f64, x: [f64; 2]) -> [f64; 2] {
        match self {
            VelocityPreset::Zero => [0.0, 0.0],
            VelocityPreset::Constant(c) => *c,
            VelocityPreset::PotentialWell { center, strength } => [
                -strength * (x[0] - center[0]),
                -strength * (x[1] - center[1]),
            ],
            VelocityPreset::Rotation { center, omega } => {
                [-omega * (x[1] - center[1]), omega * (x[0] - center[0])]
            }
            VelocityPreset::PiecewiseX { breaks, values } => {
                let k = breaks.iter().take_while(|&&b| x[0] >= b).count();
                [values[k], 0.0]
            }
            VelocityPreset::Table(_) => panic!("table drift has no closed form"),
        }
    }

    pub fn sample(&self, grid: &Grid, t: f64) -> Result<VelocityField> {
        match self {
            VelocityPreset::Table(cells) => {
                if cells.len() != grid.len() {
                    return Err(Error::invalid("velocity table length does not match grid"));
                }
                let mut cells = cells.clone();
                if grid.dim() == 1 {
                    for c in &mut cells {
                        c[1] = 0.0;
                    }
                }
                VelocityField::from_cells(*grid, t, cells)
            }
            _ => {
                let dim = grid.dim();
                VelocityField::sample(*grid, t, |t, x| {
                    let mut u = self.eval(t, x);
                    if dim == 1 {
                        u[1] = 0.0;
                    }
                    u
                })
            }
        }
    }

    /// Exact monotonicity constant `λ` where it is known in closed form.
    pub fn analytic_lambda(&self) -> Option<f64> {
        match self {
            VelocityPreset::Zero | VelocityPreset::Constant(_) => Some(0.0),
            VelocityPreset::PotentialWell { strength, .. } => Some(-strength),
            VelocityPreset::Rotation { .. } => Some(0.0),
            VelocityPreset::PiecewiseX { .. } | VelocityPreset::Table(_) => None,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self, VelocityPreset::Table(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn indicator_on_half_domain() {
        let g = Grid::line(2.0, 64).unwrap();
        let rho = make_density(&g, &DensityPreset::Box { lo: [0.0, 0.0], hi: [1.0, 0.0] }, 0).unwrap();
        for (i, &v) in rho.values().iter().enumerate() {
            let expected = if i < 32 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-14, "cell {i}: {v}");
        }
        assert!((rho.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_is_inverse_volume() {
        let g = Grid::rect([2.0, 1.5], [6, 5]).unwrap();
        let rho = make_density(&g, &DensityPreset::Uniform, 0).unwrap();
        assert!(rho.values().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let g = Grid::rect([2.0, 2.0], [8, 8]).unwrap();
        let a = make_density(&g, &DensityPreset::Noise, 7).unwrap();
        let b = make_density(&g, &DensityPreset::Noise, 7).unwrap();
        let c = make_density(&g, &DensityPreset::Noise, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn table_length_checked() {
        let g = Grid::line(2.0, 4).unwrap();
        assert!(make_density(&g, &DensityPreset::Table(vec![1.0; 3]), 0).is_err());
        assert_eq!(
            make_density(&g, &DensityPreset::Table(vec![0.0; 4]), 0),
            Err(Error::DegenerateDensity)
        );
    }

    #[test]
    fn piecewise_drift() {
        let u = VelocityPreset::PiecewiseX {
            breaks: vec![1.0],
            values: vec![1.0, -0.5],
        };
        u.validate().unwrap();
        assert_eq!(u.eval(0.0, [0.5, 0.0]), [1.0, 0.0]);
        assert_eq!(u.eval(0.0, [1.0, 0.0]), [-0.5, 0.0]);
        assert!(VelocityPreset::PiecewiseX { breaks: vec![1.0], values: vec![1.0] }
            .validate()
            .is_err());
    }
}
