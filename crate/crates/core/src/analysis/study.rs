//! Refinement studies over random smooth instances for the positivity and
//! geodesic-derivative checks.

use alloc::vec::Vec;

use super::checks::{
    random_smooth_density, random_smooth_pressure, verify_geodesic_derivative, verify_positivity,
    GeodesicDerivativeReport,
};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::pressure::sample_pressure_test_functions;

/// Draws per requested instance before giving up on finding saturation.
const ATTEMPTS_PER_INSTANCE: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct BandLevel {
    pub grid: Grid,
    pub instances: usize,
    /// Instances with a negative integral.
    pub negative: usize,
    /// Worst `C_h` over the instances.
    pub band_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityStudy {
    pub levels: Vec<BandLevel>,
    /// Largest `C_h` on the two coarsest levels.
    pub calibrated: f64,
    /// `max (C_h / calibrated − 1)` over the finer levels.
    pub max_slack: f64,
    pub verdict: bool,
}

/// `C_h` on `base` and `levels − 1` refinements. The constant is calibrated
/// on the two coarsest levels and must bound every finer one.
///
/// Instance `k` pairs smooth densities drawn from seeds `2(seed + k)` and
/// `2(seed + k) + 1` with a pressure sampled on the saturated set of the
/// first; draws without saturation are skipped. The same draws are used at
/// every level.
pub fn positivity_study(base: &Grid, levels: usize, instances: usize, seed: u64, tol: &Tolerances) -> Result<PositivityStudy> {
    if levels < 3 {
        return Err(Error::invalid("a positivity study needs at least three levels"));
    }
    if instances == 0 {
        return Err(Error::invalid("no instances requested"));
    }
    let mut grid = *base;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        out.push(band_level(&grid, instances, seed, tol)?);
        grid = grid.refined()?;
    }
    let calibrated = out[0].band_constant.max(out[1].band_constant);
    let max_slack = out[2..]
        .iter()
        .map(|l| {
            if calibrated > 0.0 {
                l.band_constant / calibrated - 1.0
            } else if l.band_constant > 0.0 {
                f64::INFINITY
            } else {
                -1.0
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PositivityStudy {
        levels: out,
        calibrated,
        verdict: max_slack <= 0.0,
        max_slack,
    })
}

fn band_level(grid: &Grid, instances: usize, seed: u64, tol: &Tolerances) -> Result<BandLevel> {
    let mut level = BandLevel {
        grid: *grid,
        instances: 0,
        negative: 0,
        band_constant: 0.0,
    };
    for k in 0..instances * ATTEMPTS_PER_INSTANCE {
        if level.instances == instances {
            break;
        }
        let s = seed.wrapping_add(k as u64);
        let r0 = random_smooth_density(grid, s.wrapping_mul(2))?;
        let Some(p) = sample_pressure_test_functions(&r0, 1, s, tol).pop() else {
            continue;
        };
        let r1 = random_smooth_density(grid, s.wrapping_mul(2).wrapping_add(1))?;
        let r = verify_positivity(&r0, &r1, &p, tol)?;
        level.instances += 1;
        if r.integral < 0.0 {
            level.negative += 1;
        }
        level.band_constant = level.band_constant.max(r.band_constant());
    }
    if level.instances < instances {
        return Err(Error::invalid(alloc::format!(
            "only {} of {instances} draws saturated on the {}x{} grid",
            level.instances,
            grid.nx(),
            grid.ny()
        )));
    }
    Ok(level)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeStudy {
    pub grid: Grid,
    /// `max(1e−3, 10h)`.
    pub band: f64,
    pub reports: Vec<GeodesicDerivativeReport>,
    pub max_gap: f64,
    /// `max_gap / band − 1`.
    pub max_slack: f64,
    pub verdict: bool,
}

/// The geodesic derivative on `instances` smooth density pairs (same draws
/// as [`positivity_study`]) with smooth positive pressures.
pub fn derivative_study(grid: &Grid, instances: usize, seed: u64, tol: &Tolerances) -> Result<DerivativeStudy> {
    if instances == 0 {
        return Err(Error::invalid("no instances requested"));
    }
    let band = (10.0 * grid.spacing(0)).max(1e-3);
    let mut reports = Vec::with_capacity(instances);
    for k in 0..instances {
        let s = seed.wrapping_add(k as u64);
        let r0 = random_smooth_density(grid, s.wrapping_mul(2))?;
        let r1 = random_smooth_density(grid, s.wrapping_mul(2).wrapping_add(1))?;
        let p = random_smooth_pressure(grid, s)?;
        reports.push(verify_geodesic_derivative(&r0, &r1, &p, tol)?);
    }
    let max_gap = reports.iter().map(|r| r.gap).fold(0.0, f64::max);
    Ok(DerivativeStudy {
        grid: *grid,
        band,
        reports,
        max_gap,
        max_slack: max_gap / band - 1.0,
        verdict: max_gap <= band,
    })
}
