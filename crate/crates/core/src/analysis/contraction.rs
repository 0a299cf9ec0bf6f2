use alloc::vec::Vec;

use crate::config::Tolerances;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::field::l1_distance;
use crate::math;
use crate::transport::{w2_exact_1d, w2_lp};

/// Default slack for the W₂ report.
pub const W2_SLACK: f64 = 0.10;
/// Default slack for the L¹ report.
pub const L1_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContractionMode {
    /// Bound `e^{λt} W₂(0)`.
    W2 { lambda: f64 },
    /// Bound `‖ρ¹₀ − ρ²₀‖₁`.
    L1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub mode: ContractionMode,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub bounds: Vec<f64>,
    /// `distance / bound − 1`; −1 when the distance is zero, +∞ when only
    /// the bound is.
    pub slack: Vec<f64>,
    pub max_slack: f64,
    pub slack_tolerance: f64,
    pub verdict: bool,
}

impl ContractionReport {
    fn build(mode: ContractionMode, times: Vec<f64>, distances: Vec<f64>, slack_tolerance: f64) -> Self {
        let d0 = distances[0];
        let bounds: Vec<f64> = times
            .iter()
            .map(|&t| match mode {
                ContractionMode::W2 { lambda } => math::exp(lambda * t) * d0,
                ContractionMode::L1 => d0,
            })
            .collect();
        let slack: Vec<f64> = distances
            .iter()
            .zip(&bounds)
            .map(|(&d, &b)| {
                if d == 0.0 {
                    -1.0
                } else if b > 0.0 {
                    d / b - 1.0
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let max_slack = slack.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            mode,
            times,
            distances,
            bounds,
            verdict: slack.iter().all(|s| *s <= slack_tolerance),
            slack,
            max_slack,
            slack_tolerance,
        }
    }
}

fn aligned_times(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    if a.grid != b.grid {
        return Err(Error::Misaligned("trajectories use different grids".into()));
    }
    if a.frames.len() != b.frames.len() {
        return Err(Error::Misaligned(alloc::format!(
            "{} frames against {}",
            a.frames.len(),
            b.frames.len()
        )));
    }
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        if (fa.time - fb.time).abs() > 1e-12 * (1.0 + fa.time.abs()) {
            return Err(Error::Misaligned(alloc::format!(
                "frame times {} and {} differ",
                fa.time,
                fb.time
            )));
        }
    }
    Ok(a.times())
}

/// W₂ distance per frame (1D closed form, exact solver in 2D) against
/// `e^{λt} W₂(0)`.
pub fn w2_contraction_report(
    a: &Trajectory,
    b: &Trajectory,
    lambda: f64,
    slack_tolerance: f64,
    tol: &Tolerances,
) -> Result<ContractionReport> {
    let times = aligned_times(a, b)?;
    let distances = a
        .frames
        .iter()
        .zip(&b.frames)
        .map(|(fa, fb)| {
            if a.grid.dim() == 1 {
                w2_exact_1d(&fa.density, &fb.density)
            } else {
                w2_lp(&fa.density, &fb.density, tol)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ContractionReport::build(
        ContractionMode::W2 { lambda },
        times,
        distances,
        slack_tolerance,
    ))
}

/// L¹ distance per frame against the initial distance.
pub fn l1_contraction_report(a: &Trajectory, b: &Trajectory, slack_tolerance: f64) -> Result<ContractionReport> {
    let times = aligned_times(a, b)?;
    let distances = a
        .frames
        .iter()
        .zip(&b.frames)
        .map(|(fa, fb)| l1_distance(&fa.density, &fb.density))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ContractionReport::build(ContractionMode::L1, times, distances, slack_tolerance))
}
