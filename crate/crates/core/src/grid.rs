//! Uniform Cartesian grids on boxes `[0, L₁] × [0, L₂]`.
//!
//! Cells are stored row-major: `index = iy · nx + ix`. In 1D the second axis
//! is a single dummy row. Interior faces carry staggered vector data; the
//! boundary faces are never stored because every operator here imposes zero
//! normal flux there.

use alloc::format;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    extent: [f64; 2],
    cells: [usize; 2],
}

impl Grid {
    pub fn new(dim: usize, extent: [f64; 2], cells: [usize; 2]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        let (extent, cells) = if dim == 1 {
            ([extent[0], 1.0], [cells[0], 1])
        } else {
            (extent, cells)
        };
        for axis in 0..dim {
            if !(extent[axis].is_finite() && extent[axis] > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "extent {} on axis {axis} must be positive",
                    extent[axis]
                )));
            }
            if cells[axis] < 2 {
                return Err(Error::InvalidGrid(format!(
                    "need at least 2 cells on axis {axis}, got {}",
                    cells[axis]
                )));
            }
        }
        let grid = Self { dim, extent, cells };
        let volume = grid.volume();
        if volume <= 1.0 {
            return Err(Error::DomainTooSmall { volume });
        }
        Ok(grid)
    }

    pub fn line(length: f64, cells: usize) -> Result<Self> {
        Self::new(1, [length, 1.0], [cells, 1])
    }

    pub fn rect(extent: [f64; 2], cells: [usize; 2]) -> Result<Self> {
        Self::new(2, extent, cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn nx(&self) -> usize {
        self.cells[0]
    }

    pub fn ny(&self) -> usize {
        self.cells[1]
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.cells[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// `|Ω|`.
    pub fn volume(&self) -> f64 {
        self.extent[..self.dim].iter().product()
    }

    /// Cells have the same spacing on every axis (up to 1e-12 relative).
    pub fn is_isotropic(&self) -> bool {
        self.dim == 1 || (self.spacing(0) - self.spacing(1)).abs() <= 1e-12 * self.spacing(0)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.cells[0] + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.cells[0], index / self.cells[0])
    }

    /// Cell center `((i + ½)h_x, (j + ½)h_y)`; the second entry is 0 in 1D.
    pub fn center(&self, index: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(index);
        let x = (ix as f64 + 0.5) * self.spacing(0);
        if self.dim == 1 {
            [x, 0.0]
        } else {
            [x, (iy as f64 + 0.5) * self.spacing(1)]
        }
    }

    /// Number of interior faces normal to `axis`.
    pub fn face_count(&self, axis: usize) -> usize {
        if axis >= self.dim {
            return 0;
        }
        if axis == 0 {
            (self.cells[0] - 1) * self.cells[1]
        } else {
            self.cells[0] * (self.cells[1] - 1)
        }
    }

    /// Cells on either side of interior face `k` normal to `axis`
    /// (lower coordinate first).
    pub fn face_cells(&self, axis: usize, k: usize) -> (usize, usize) {
        if axis == 0 {
            let nf = self.cells[0] - 1;
            let (i, j) = (k % nf, k / nf);
            let lo = self.index(i, j);
            (lo, lo + 1)
        } else {
            let lo = k;
            (lo, lo + self.cells[0])
        }
    }

    /// Center of interior face `k` normal to `axis`.
    pub fn face_center(&self, axis: usize, k: usize) -> [f64; 2] {
        let (lo, _) = self.face_cells(axis, k);
        let mut c = self.center(lo);
        c[axis] += 0.5 * self.spacing(axis);
        c
    }

    /// Squared distance between two cell centers in units of `h²`.
    /// Only meaningful on isotropic grids.
    pub fn lattice_distance2(&self, a: usize, b: usize) -> u64 {
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        let dx = ax.abs_diff(bx) as u64;
        let dy = ay.abs_diff(by) as u64;
        dx * dx + dy * dy
    }

    pub fn distance2(&self, a: usize, b: usize) -> f64 {
        let ca = self.center(a);
        let cb = self.center(b);
        let dx = ca[0] - cb[0];
        let dy = ca[1] - cb[1];
        dx * dx + dy * dy
    }

    /// Same grid by value (the comparison tolerates no difference).
    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }

    /// Grid with twice as many cells per axis.
    pub fn refined(&self) -> Result<Grid> {
        Grid::new(
            self.dim,
            self.extent,
            [self.cells[0] * 2, if self.dim == 2 { self.cells[1] * 2 } else { 1 }],
        )
    }

    /// Index of the cell containing `x` (clamped to the domain).
    pub fn locate(&self, x: [f64; 2]) -> usize {
        let mut ij = [0usize; 2];
        for axis in 0..self.dim {
            let h = self.spacing(axis);
            let k = crate::math::floor(x[axis] / h);
            ij[axis] = if k < 0.0 {
                0
            } else {
                (k as usize).min(self.cells[axis] - 1)
            };
        }
        self.index(ij[0], ij[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_domains() {
        assert!(matches!(Grid::line(1.0, 16), Err(Error::DomainTooSmall { .. })));
        assert!(matches!(Grid::rect([1.0, 0.5], [4, 4]), Err(Error::DomainTooSmall { .. })));
        assert!(Grid::line(2.0, 1).is_err());
        assert!(Grid::new(3, [2.0, 2.0], [4, 4]).is_err());
    }

    #[test]
    fn centers_and_faces() {
        let g = Grid::rect([2.0, 1.5], [4, 3]).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.center(g.index(1, 2)), [0.75, 1.25]);
        assert_eq!(g.face_count(0), 9);
        assert_eq!(g.face_count(1), 8);
        assert_eq!(g.face_cells(0, 4), (g.index(1, 1), g.index(2, 1)));
        assert_eq!(g.face_cells(1, 5), (5, 9));
        assert_eq!(g.face_center(0, 0), [0.5, 0.25]);
        assert!(g.is_isotropic());
        assert!(!Grid::rect([2.0, 1.5], [4, 4]).unwrap().is_isotropic());
        assert_eq!(g.locate([1.9, 0.1]), g.index(3, 0));
    }

    #[test]
    fn line_geometry() {
        let g = Grid::line(2.0, 8).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.spacing(0), 0.25);
        assert_eq!(g.cell_volume(), 0.25);
        assert_eq!(g.face_count(0), 7);
        assert_eq!(g.face_count(1), 0);
        assert_eq!(g.lattice_distance2(1, 4), 9);
        assert!((g.distance2(1, 4) - 0.5625).abs() < 1e-15);
    }
}
