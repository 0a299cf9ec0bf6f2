use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::preset::VelocityPreset;
use crate::rng::Rng;

/// Where a monotonicity constant came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSource {
    /// Closed form of a built-in preset.
    Analytic,
    /// Sampled lower bound.
    Estimated,
}

/// `max (u(x) − u(y))·(x − y) / |x − y|²` over `samples` random pairs of
/// distinct cell centers.
///
/// The pairs are a prefix of one seeded stream, so more samples can only
/// raise the estimate. The result is a lower bound on the true constant.
pub fn estimate_lambda(u: &VelocityPreset, grid: &Grid, t: f64, samples: usize, seed: u64) -> Result<f64> {
    if samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    let n = grid.len();
    if n < 2 {
        return Err(Error::InvalidGrid("a single cell has no pairs".into()));
    }
    let field = u.sample(grid, t)?;
    let cells = field.cells();
    let mut rng = Rng::seeded(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        let i = rng.below(n);
        let mut j = rng.below(n - 1);
        if j >= i {
            j += 1;
        }
        best = best.max(quotient(grid, cells, i, j));
    }
    Ok(best)
}

/// The same quotient maximized over every pair of cells.
pub fn exhaustive_lambda(u: &VelocityPreset, grid: &Grid, t: f64) -> Result<f64> {
    let field = u.sample(grid, t)?;
    let cells = field.cells();
    let mut best = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            best = best.max(quotient(grid, cells, i, j));
        }
    }
    Ok(best)
}

fn quotient(grid: &Grid, cells: &[[f64; 2]], i: usize, j: usize) -> f64 {
    let (x, y) = (grid.center(i), grid.center(j));
    let d = [x[0] - y[0], x[1] - y[1]];
    let du = [cells[i][0] - cells[j][0], cells[i][1] - cells[j][1]];
    (du[0] * d[0] + du[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])
}

/// Analytic constant where the preset has one, otherwise the sampled estimate.
pub fn lambda_for(u: &VelocityPreset, grid: &Grid, samples: usize, seed: u64) -> Result<(f64, LambdaSource)> {
    match u.analytic_lambda() {
        Some(l) => Ok((l, LambdaSource::Analytic)),
        None => Ok((estimate_lambda(u, grid, 0.0, samples, seed)?, LambdaSource::Estimated)),
    }
}
