//! Discrete gradient and divergence on the staggered grid.
//!
//! `gradient` maps cell values to interior faces; `divergence` is its negative
//! adjoint, so `Σ_f (∇p)_f w_f = −Σ_c p_c (∇·w)_c` holds exactly and no
//! boundary term appears (zero normal flux on ∂Ω).

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::Grid;

/// Face values, one array per axis (the second is empty in 1D).
pub type FaceValues = [Vec<f64>; 2];

pub fn zero_faces(grid: &Grid) -> FaceValues {
    [vec![0.0; grid.face_count(0)], vec![0.0; grid.face_count(1)]]
}

/// `(∇p)_f = (p_hi − p_lo) / h`.
pub fn gradient(grid: &Grid, p: &[f64]) -> FaceValues {
    let mut out = zero_faces(grid);
    gradient_into(grid, p, &mut out);
    out
}

pub fn gradient_into(grid: &Grid, p: &[f64], out: &mut FaceValues) {
    for axis in 0..grid.dim() {
        let inv_h = 1.0 / grid.spacing(axis);
        for (k, g) in out[axis].iter_mut().enumerate() {
            let (lo, hi) = grid.face_cells(axis, k);
            *g = (p[hi] - p[lo]) * inv_h;
        }
    }
}

/// `(∇·w)_c = Σ_faces ± w_f / h` with zero flux through ∂Ω.
pub fn divergence(grid: &Grid, w: &FaceValues) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    divergence_into(grid, w, &mut out);
    out
}

pub fn divergence_into(grid: &Grid, w: &FaceValues, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for axis in 0..grid.dim() {
        let inv_h = 1.0 / grid.spacing(axis);
        for (k, &f) in w[axis].iter().enumerate() {
            let (lo, hi) = grid.face_cells(axis, k);
            out[lo] += f * inv_h;
            out[hi] -= f * inv_h;
        }
    }
}

/// Neumann Laplacian `∇·∇`.
pub fn laplacian(grid: &Grid, p: &[f64]) -> Vec<f64> {
    divergence(grid, &gradient(grid, p))
}

/// `Σ_f a_f b_f · cellVolume`.
pub fn face_dot(grid: &Grid, a: &FaceValues, b: &FaceValues) -> f64 {
    let s: f64 = (0..2)
        .map(|axis| a[axis].iter().zip(&b[axis]).map(|(x, y)| x * y).sum::<f64>())
        .sum();
    s * grid.cell_volume()
}

pub fn face_norm2(grid: &Grid, a: &FaceValues) -> f64 {
    face_dot(grid, a, a)
}

/// Cell-centered gradient: central differences inside, one-sided at the walls.
pub fn cell_gradient(grid: &Grid, p: &[f64]) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; grid.len()];
    for (c, g) in out.iter_mut().enumerate() {
        let (ix, iy) = grid.coords(c);
        for axis in 0..grid.dim() {
            let (i, n) = if axis == 0 { (ix, grid.nx()) } else { (iy, grid.ny()) };
            let h = grid.spacing(axis);
            let at = |k: usize| {
                if axis == 0 {
                    p[grid.index(k, iy)]
                } else {
                    p[grid.index(ix, k)]
                }
            };
            g[axis] = if i == 0 {
                (at(1) - at(0)) / h
            } else if i == n - 1 {
                (at(n - 1) - at(n - 2)) / h
            } else {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn summation_by_parts_is_exact() {
        let g = Grid::rect([2.0, 1.5], [7, 5]).unwrap();
        let mut rng = Rng::seeded(3);
        let p: Vec<f64> = (0..g.len()).map(|_| rng.range(-1.0, 1.0)).collect();
        let w = [0, 1].map(|a| (0..g.face_count(a)).map(|_| rng.range(-1.0, 1.0)).collect::<Vec<_>>());
        let lhs = face_dot(&g, &gradient(&g, &p), &w);
        let div = divergence(&g, &w);
        let rhs = -p.iter().zip(&div).map(|(a, b)| a * b).sum::<f64>() * g.cell_volume();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn laplacian_conserves_and_kills_constants() {
        let g = Grid::line(2.0, 9).unwrap();
        let lap = laplacian(&g, &[3.0; 9]);
        assert!(lap.iter().all(|v| v.abs() < 1e-12));
        let p: Vec<f64> = (0..9).map(|i| (i * i) as f64).collect();
        assert!(laplacian(&g, &p).iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn cell_gradient_of_linear_function() {
        let g = Grid::rect([2.0, 2.0], [5, 5]).unwrap();
        let p: Vec<f64> = (0..g.len())
            .map(|i| {
                let c = g.center(i);
                2.0 * c[0] - c[1]
            })
            .collect();
        for v in cell_gradient(&g, &p) {
            assert!((v[0] - 2.0).abs() < 1e-12 && (v[1] + 1.0).abs() < 1e-12);
        }
    }
}
