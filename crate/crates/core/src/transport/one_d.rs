//! Closed-form `W₂` on the line through monotone rearrangement.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::math;

fn check_1d(a: &DensityField, b: &DensityField) -> Result<f64> {
    if a.grid().dim() != 1 || b.grid().dim() != 1 {
        return Err(Error::invalid("one-dimensional W2 needs 1D grids"));
    }
    super::balance_factor(a, b)
}

/// `W₂` between the cell masses placed at cell centers.
///
/// This is the quantity the exact solver computes, so the two agree to
/// roundoff. Grids may differ.
pub fn w2_exact_1d(a: &DensityField, b: &DensityField) -> Result<f64> {
    let scale = check_1d(a, b)?;
    let atoms = |f: &DensityField, s: f64| -> Vec<(f64, f64)> {
        let cv = f.grid().cell_volume();
        f.values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| (f.grid().center(i)[0], v * cv * s))
            .collect()
    };
    let xa = atoms(a, 1.0);
    let xb = atoms(b, scale);
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (xa[0].1, xb[0].1);
    let mut cost = 0.0;
    while i < xa.len() && j < xb.len() {
        let d = xa[i].0 - xb[j].0;
        if ra <= rb {
            cost += ra * d * d;
            rb -= ra;
            i += 1;
            if i < xa.len() {
                ra = xa[i].1;
            }
        } else {
            cost += rb * d * d;
            ra -= rb;
            j += 1;
            if j < xb.len() {
                rb = xb[j].1;
            }
        }
    }
    Ok(math::sqrt(cost))
}

/// `W₂` between the piecewise-constant densities themselves.
///
/// Quantile functions of piecewise-constant densities are piecewise linear,
/// so the integral `∫₀¹ |F⁻¹ − G⁻¹|²` is evaluated exactly segment by segment.
/// Grids may differ.
pub fn w2_cell_average_1d(a: &DensityField, b: &DensityField) -> Result<f64> {
    let scale = check_1d(a, b)?;
    // (mass, left edge, right edge) per positive cell.
    let segments = |f: &DensityField, s: f64| -> Vec<(f64, f64, f64)> {
        let h = f.grid().spacing(0);
        f.values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| (v * h * s, i as f64 * h, (i + 1) as f64 * h))
            .collect()
    };
    let sa = segments(a, 1.0);
    let sb = segments(b, scale);
    let (mut i, mut j) = (0, 0);
    // Mass already consumed inside the current segments.
    let (mut ua, mut ub) = (0.0, 0.0);
    let mut cost = 0.0;
    let at = |seg: (f64, f64, f64), used: f64| seg.1 + (seg.2 - seg.1) * (used / seg.0);
    while i < sa.len() && j < sb.len() {
        let left_a = sa[i].0 - ua;
        let left_b = sb[j].0 - ub;
        let step = left_a.min(left_b);
        let d0 = at(sa[i], ua) - at(sb[j], ub);
        let (na, nb) = (ua + step, ub + step);
        let d1 = at(sa[i], na.min(sa[i].0)) - at(sb[j], nb.min(sb[j].0));
        cost += step * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        if left_a <= left_b {
            i += 1;
            ua = 0.0;
            ub = nb;
        } else {
            j += 1;
            ub = 0.0;
            ua = na;
        }
    }
    Ok(math::sqrt(cost))
}
