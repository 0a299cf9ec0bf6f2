//! Cell-averaged scalar fields and staggered velocity fields.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Probability density stored as cell averages.
///
/// Values are nonnegative; construction through [`DensityField::normalized`]
/// rescales to unit mass. Sub-probability fields (used when extending the
/// projection to measures of mass below `|Ω|`) are built with
/// [`DensityField::from_values`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityField {
    /// Wraps raw values without normalizing. Rejects negative or non-finite entries.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        for (cell, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("density"));
            }
            if value < 0.0 {
                return Err(Error::NegativeDensity { cell, value });
            }
        }
        Ok(Self { grid, values })
    }

    /// Rescales raw nonnegative values to unit mass.
    pub fn normalized(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        let field = Self::from_values(grid, core::mem::take(&mut values))?;
        let mass = field.mass();
        if mass <= 0.0 {
            return Err(Error::DegenerateDensity);
        }
        let mut values = field.values;
        for v in &mut values {
            *v /= mass;
        }
        Ok(Self { grid, values })
    }

    /// Constant `1/|Ω|`.
    pub fn uniform(grid: Grid) -> Self {
        let v = 1.0 / grid.volume();
        Self {
            grid,
            values: vec![v; grid.len()],
        }
    }

    /// Internal constructor for solver output that is nonnegative by construction;
    /// roundoff negatives are clipped to zero.
    pub(crate) fn from_solver(grid: Grid, mut values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        for v in &mut values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `Σ ρ · cellVolume`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn linf(&self) -> f64 {
        linf(&self.values)
    }

    pub fn is_feasible(&self, constraint_tolerance: f64) -> bool {
        self.max() <= 1.0 + constraint_tolerance
    }

    /// Cells whose mass is positive.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] > 0.0).collect()
    }

    /// `Σ φ ρ · cellVolume`.
    pub fn integrate(&self, phi: &[f64]) -> f64 {
        self.values.iter().zip(phi).map(|(r, f)| r * f).sum::<f64>() * self.grid.cell_volume()
    }
}

/// Nonnegative pressure per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    grid: Grid,
    values: Vec<f64>,
}

impl PressureField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pressure"));
        }
        if let Some((cell, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::invalid(alloc::format!(
                "negative pressure {value} at cell {cell}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn linf(&self) -> f64 {
        linf(&self.values)
    }

    /// `max p · max(0, 1 − ρ − threshold)`: zero when `p` vanishes off the
    /// saturated set.
    pub fn complementarity(&self, density: &DensityField, threshold: f64) -> f64 {
        self.values
            .iter()
            .zip(density.values())
            .map(|(p, r)| p * (1.0 - r - threshold).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Velocity sampled at cell centers and, staggered, at interior faces.
///
/// Transport and the cone projection use the face-normal components; the
/// cell-center vectors are kept for output and for `linf`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: Grid,
    time: f64,
    cells: Vec<[f64; 2]>,
    faces: [Vec<f64>; 2],
}

impl VelocityField {
    pub fn zeros(grid: Grid, time: f64) -> Self {
        Self {
            grid,
            time,
            cells: vec![[0.0; 2]; grid.len()],
            faces: [vec![0.0; grid.face_count(0)], vec![0.0; grid.face_count(1)]],
        }
    }

    /// Samples a closed-form field at cell centers and face centers.
    pub fn sample(grid: Grid, time: f64, f: impl Fn(f64, [f64; 2]) -> [f64; 2]) -> Result<Self> {
        let cells: Vec<[f64; 2]> = (0..grid.len()).map(|i| f(time, grid.center(i))).collect();
        let faces = [0, 1].map(|axis| {
            (0..grid.face_count(axis))
                .map(|k| f(time, grid.face_center(axis, k))[axis])
                .collect::<Vec<f64>>()
        });
        Self::from_parts(grid, time, cells, faces)
    }

    /// Builds a field from cell-center vectors; faces take the average of the
    /// two adjacent cells.
    pub fn from_cells(grid: Grid, time: f64, cells: Vec<[f64; 2]>) -> Result<Self> {
        check_len(&grid, cells.len())?;
        let faces = [0, 1].map(|axis| {
            (0..grid.face_count(axis))
                .map(|k| {
                    let (a, b) = grid.face_cells(axis, k);
                    0.5 * (cells[a][axis] + cells[b][axis])
                })
                .collect::<Vec<f64>>()
        });
        Self::from_parts(grid, time, cells, faces)
    }

    /// Builds a field from face-normal components; cell vectors average the
    /// two faces of each cell along each axis (boundary faces count as zero).
    pub fn from_faces(grid: Grid, time: f64, faces: [Vec<f64>; 2]) -> Result<Self> {
        for axis in 0..2 {
            if faces[axis].len() != grid.face_count(axis) {
                return Err(Error::invalid("face array length does not match grid"));
            }
        }
        let mut cells = vec![[0.0; 2]; grid.len()];
        for axis in 0..grid.dim() {
            for (k, &u) in faces[axis].iter().enumerate() {
                let (a, b) = grid.face_cells(axis, k);
                cells[a][axis] += 0.5 * u;
                cells[b][axis] += 0.5 * u;
            }
        }
        Self::from_parts(grid, time, cells, faces)
    }

    fn from_parts(grid: Grid, time: f64, cells: Vec<[f64; 2]>, faces: [Vec<f64>; 2]) -> Result<Self> {
        let finite = cells.iter().all(|c| c[0].is_finite() && c[1].is_finite())
            && faces.iter().all(|f| f.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::NonFinite("velocity"));
        }
        Ok(Self {
            grid,
            time,
            cells,
            faces,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn cells(&self) -> &[[f64; 2]] {
        &self.cells
    }

    /// Face-normal components on interior faces normal to `axis`.
    pub fn faces(&self, axis: usize) -> &[f64] {
        &self.faces[axis]
    }

    /// Largest absolute component over cell centers.
    pub fn linf(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c[0].abs().max(c[1].abs()))
            .fold(0.0, f64::max)
    }

    /// Largest absolute face-normal component.
    pub fn face_linf(&self) -> f64 {
        self.faces.iter().map(|f| linf(f)).fold(0.0, f64::max)
    }

    /// Discrete `‖u‖²` on faces: `Σ u_f² · cellVolume`.
    pub fn face_norm2(&self) -> f64 {
        self.faces
            .iter()
            .flat_map(|f| f.iter())
            .map(|u| u * u)
            .sum::<f64>()
            * self.grid.cell_volume()
    }
}

/// `Σ |a − b| · cellVolume`.
pub fn l1_distance(a: &DensityField, b: &DensityField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        * a.grid().cell_volume())
}

/// Largest absolute entry.
pub fn linf(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::invalid(alloc::format!(
            "{len} values for a grid of {} cells",
            grid.len()
        )));
    }
    Ok(())
}
