use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::Grid;
use crate::math;

/// One backward-Euler heat step `(I − τΔ)ρ⁺ = ρ` with the Neumann Laplacian.
///
/// 1D uses the tridiagonal (Thomas) solve; 2D diagonalizes the separable
/// operator with an orthonormal cosine transform on each axis.
pub fn diffuse(rho: &DensityField, tau: f64) -> Result<DensityField> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("diffusion step must be positive"));
    }
    let grid = *rho.grid();
    let values = if grid.dim() == 1 {
        thomas_neumann(rho.values(), tau / (grid.spacing(0) * grid.spacing(0)))?
    } else {
        cosine_solve(&grid, rho.values(), tau)
    };
    Ok(DensityField::from_solver(grid, values))
}

/// Solves `(I + a L) x = b` where `L` is the 1D Neumann graph Laplacian.
fn thomas_neumann(b: &[f64], a: f64) -> Result<Vec<f64>> {
    let n = b.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let diag = |i: usize| 1.0 + a * if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
    let mut m = diag(0);
    c[0] = -a / m;
    d[0] = b[0] / m;
    for i in 1..n {
        m = diag(i) + a * c[i - 1];
        if m == 0.0 || !m.is_finite() {
            return Err(Error::invalid("tridiagonal solve broke down"));
        }
        c[i] = -a / m;
        d[i] = (b[i] + a * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Orthonormal DCT-II matrix, row `k` is the `k`-th cosine mode.
fn dct_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for k in 0..n {
        let s = if k == 0 { math::sqrt(1.0 / n as f64) } else { math::sqrt(2.0 / n as f64) };
        for i in 0..n {
            m[k * n + i] = s * math::cos(core::f64::consts::PI * k as f64 * (i as f64 + 0.5) / n as f64);
        }
    }
    m
}

fn cosine_solve(grid: &Grid, b: &[f64], tau: f64) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let cx = dct_matrix(nx);
    let cy = dct_matrix(ny);
    let eig = |k: usize, n: usize, h: f64| {
        let s = math::sin(core::f64::consts::PI * k as f64 / (2.0 * n as f64));
        4.0 * s * s / (h * h)
    };
    let ex: Vec<f64> = (0..nx).map(|k| eig(k, nx, grid.spacing(0))).collect();
    let ey: Vec<f64> = (0..ny).map(|k| eig(k, ny, grid.spacing(1))).collect();

    // Forward along x, then y.
    let mut t = vec![0.0; nx * ny];
    for j in 0..ny {
        for k in 0..nx {
            t[j * nx + k] = (0..nx).map(|i| cx[k * nx + i] * b[j * nx + i]).sum();
        }
    }
    let mut s = vec![0.0; nx * ny];
    for k in 0..nx {
        for l in 0..ny {
            s[l * nx + k] = (0..ny).map(|j| cy[l * ny + j] * t[j * nx + k]).sum::<f64>() / (1.0 + tau * (ex[k] + ey[l]));
        }
    }
    // Inverse (transpose) along y, then x.
    for k in 0..nx {
        for j in 0..ny {
            t[j * nx + k] = (0..ny).map(|l| cy[l * ny + j] * s[l * nx + k]).sum();
        }
    }
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            out[j * nx + i] = (0..nx).map(|k| cx[k * nx + i] * t[j * nx + k]).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::laplacian;

    fn residual(grid: &Grid, x: &[f64], b: &[f64], tau: f64) -> f64 {
        let lap = laplacian(grid, x);
        x.iter().zip(&lap).zip(b).map(|((x, l), b)| (x - tau * l - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn solves_the_implicit_system() {
        for grid in [Grid::line(2.0, 40).unwrap(), Grid::rect([2.0, 1.5], [9, 7]).unwrap()] {
            let b: Vec<f64> = (0..grid.len()).map(|i| ((i * 37) % 11) as f64).collect();
            let rho = DensityField::normalized(grid, b).unwrap();
            let out = diffuse(&rho, 0.05).unwrap();
            assert!(residual(&grid, out.values(), rho.values(), 0.05) < 1e-12);
            assert!((out.mass() - rho.mass()).abs() < 1e-13);
            assert!(out.max() <= rho.max() && out.values().iter().all(|v| *v >= 0.0));
        }
    }
}
